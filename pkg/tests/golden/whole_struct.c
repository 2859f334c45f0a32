struct foo {
    int f1;
    int f2;
};

#pragma requires l1:secrecy then l2:secrecy
struct foo x;

#pragma param l1:secrecy then l2:secrecy
void consume(struct foo v);

void run(void)
{
    consume(x);
}
