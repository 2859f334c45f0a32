#pragma requires l1:secrecy then l2:secrecy
int x;

#pragma param l1:secrecy then l2:secrecy
void consume(int v);

void run(void)
{
    consume(x);
}
