/* The protocol runs on Alice's balance before it was encoded. */
#pragma requires AlicePriv:secrecy then EncodedBal:integrity
int balA;

#pragma return AlicePriv:secrecy then EncodedBal:integrity
int get_alice_balance(void);

#pragma param AlicePriv:secrecy
#pragma return EncodedBal:integrity
int encodeA(int bal);

#pragma param(2) EncodedBal:integrity
int yao_execA(void *compare, int bal);

void reveal(int *res, int party);

int compare(int a, int b) { return a > b; }

int wealthierA(void) {
    balA = get_alice_balance();
    int res = yao_execA(&compare, balA); /* expect-error */
    reveal(&res, 1);
    return res;
}
