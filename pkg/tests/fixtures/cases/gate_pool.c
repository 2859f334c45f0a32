/* Gate indices taken from a buffer must be validated before use. */
typedef unsigned long uint64_t;

typedef struct Pool {
    int size;
    void (*Gate_Copy)(struct Pool *dst, struct Pool *src, int flags, uint64_t index);
} Pool;

#pragma return valid_gate:(secrecy, integrity)
uint64_t Next_Gate_in_Buffer(Pool *dst);

#pragma param valid_gate:(secrecy, integrity)
uint64_t Check_Gate(uint64_t index);

void Copy_Pool(Pool *P, Pool *Q)
{
    int flags = 0;
    (*(P->Gate_Copy))(P, Q, flags, Next_Gate_in_Buffer(P)); /* expect-error */
}
