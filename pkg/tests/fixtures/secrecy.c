/* Alice's balance must never reach an untrusted function. */
#pragma requires AlicePriv:secrecy
int balA;

#pragma return AlicePriv:secrecy
int get_alice_balance(void);

void postBalance(int amount);

int bankHandler(void) {
    balA = get_alice_balance();
    postBalance(balA); /* expect-error */
    return 0;
}
