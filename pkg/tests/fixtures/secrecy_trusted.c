/* The same handler once postBalance is trusted with Alice's data. */
#pragma requires AlicePriv:secrecy
int balA;

#pragma return AlicePriv:secrecy
int get_alice_balance(void);

#pragma param AlicePriv:secrecy
void postBalance(int amount);

int bankHandler(void) {
    balA = get_alice_balance();
    postBalance(balA);
    return 0;
}
