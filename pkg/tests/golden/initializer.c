typedef struct {
    int f1;
    int f2;
} foo;

#pragma requires {f1: int} l1:secrecy then l2:secrecy
foo x = {.f1 = 1, .f2 = 2};

int run(void)
{
    return x.f2;
}
