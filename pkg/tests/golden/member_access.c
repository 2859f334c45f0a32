typedef struct {
    int f1;
    int f2;
} foo;

#pragma requires {f1: int} l1:secrecy then l2:secrecy
foo x;

#pragma param l1:secrecy then l2:secrecy
void consume(int v);

int run(void)
{
    consume(x.f1);
    return x.f2;
}
