/* A bit whose sign must be flipped before it is compared. */
typedef struct OblivBit {
    int bit;
} OblivBit;

#pragma param needsFlipping:secrecy
void __obliv_c__flipBit(OblivBit *src);

#pragma return needsFlipping:secrecy
OblivBit __obliv_c__signOf(const OblivBit *op);

void __obliv_c__setBitsAdd(OblivBit *dest, OblivBit *carryOut, const OblivBit *op1, const OblivBit *op2);

void __obliv_c__setLessThanSigned(OblivBit *dest, const OblivBit *op1, const OblivBit *op2)
{
    OblivBit carry, signA;
    #pragma requires needsFlipping:secrecy
    OblivBit signB;
    carry.bit = 0;
    signA = *op1;
    signB = __obliv_c__signOf(op2);
    __obliv_c__flipBit(&signA); /* expect-error */
    __obliv_c__flipBit(&signB);
    __obliv_c__setBitsAdd(dest, &carry, op1, op2);
}
