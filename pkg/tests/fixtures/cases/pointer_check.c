/* Data object pointers must be checked before they are copied. */
typedef unsigned short uint16_t;
typedef unsigned char uint8_t;

struct do_table_entry {
    uint16_t tag;
    const uint8_t *do_ptr;
};

#pragma param(2) check_valid_ptr:integrity
static void copy_do_1(uint16_t tag, const uint8_t *do_data, int with_tag);

#pragma return check_valid_ptr:integrity
const uint8_t *check_do_ptr(const uint8_t *do_ptr);

void copy_do(const struct do_table_entry *entry, int with_tag)
{
    const uint8_t *do_ptr;
    uint16_t tag = entry->tag;
    do_ptr = entry->do_ptr;
    if (do_ptr != 0)
        copy_do_1(tag, do_ptr, with_tag); /* expect-error */
}
