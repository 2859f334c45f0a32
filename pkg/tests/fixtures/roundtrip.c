/* Every kind of wrapper the header generator produces, with no external calls. */
struct foo {
    int f1;
    int f2;
};

typedef struct {
    int a;
    char b;
} pair_t;

#pragma requires l1:secrecy then l2:secrecy
int x;

#pragma requires k:integrity
unsigned char byte;

#pragma requires s:secrecy
struct foo whole;

#pragma requires {a: int} f:secrecy
pair_t split;

#pragma requires p:integrity
int *ptr;

#pragma requires {f1: int, f2: int} m:secrecy then n:integrity
struct foo both;
