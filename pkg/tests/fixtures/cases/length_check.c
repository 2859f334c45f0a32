/* A length read from untrusted data must be checked before use. */
typedef int uint8_t;
typedef unsigned short uint16_t;

#pragma return check_len:integrity
int check_length(int len);

void copy_bytes(uint8_t *dst, uint8_t *src, int n);

static void copy_do_1(uint16_t tag, uint8_t *do_data, int with_tag)
{
    #pragma requires check_len:integrity
    int len;
    uint8_t buf[16];
    if (with_tag) {
        buf[0] = tag;
    }
    len = do_data[0]; /* expect-error */
    copy_bytes(buf, do_data, 1);
}
