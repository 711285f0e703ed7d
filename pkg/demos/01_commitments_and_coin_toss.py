"""Commitments and the joint coin toss.

The input-consistency layer rests on two small primitives: hash
commitments (bind now, reveal later) and a two-party coin toss whose
outcome neither side can steer.  This script walks through both,
including what happens when someone tries to cheat.
"""

import random

from dualgc import (CoinTossCheatError, Commitment, Opening, coin_toss_commit,
                    coin_toss_open, combine_challenge, commit,
                    open_commitment)


def main():
    rng = random.Random("demo-1")

    print("=== 1. Commitments ===")
    secret = b"bid: 3 machines at 42"
    nonce = rng.randbytes(16)
    com = commit(secret, nonce)
    print(f"message    : {secret!r}")
    print(f"commitment : {com.digest.hex()[:32]}...")
    print("The digest reveals nothing about the message (hiding).")

    opening = Opening(secret, nonce)
    print(f"honest open: accepted = {open_commitment(com, opening)}")

    forged = Opening(b"bid: 3 machines at  1", nonce)
    print(f"forged open: accepted = {open_commitment(com, forged)}")
    print("A different message can never match the digest (binding).\n")

    print("=== 2. Joint coin toss ===")
    print("Each party commits to a random share, then both reveal;")
    print("the challenge is the XOR of the shares, so neither party")
    print("could pick it alone.")
    s = 6
    share1, com1, open1 = coin_toss_commit(rng, s)
    share2, com2, open2 = coin_toss_commit(rng, s)
    print(f"P1 share: {share1}  (committed first: {com1.digest.hex()[:16]}...)")
    print(f"P2 share: {share2}  (committed first: {com2.digest.hex()[:16]}...)")
    got1 = coin_toss_open(com1, open1, s, "P1")
    got2 = coin_toss_open(com2, open2, s, "P2")
    rho = combine_challenge(got1, got2)
    print(f"challenge rho = {rho}  (1 = audit that copy, 0 = evaluate it)")

    print("\nA party who reveals something other than its commitment is")
    print("caught immediately:")
    bad = Opening(open1.message[:-1] + bytes([open1.message[-1] ^ 1]),
                  open1.randomness)
    try:
        coin_toss_open(com1, bad, s, "P1")
    except CoinTossCheatError as exc:
        print(f"  CoinTossCheatError (blaming {exc.party}): {exc}")

    print("\nDegenerate challenges (all-audit or all-evaluate) are refused")
    print("and force a re-toss:")
    all_ones = combine_challenge((1,) * s, (0,) * s)
    print(f"  combine_challenge on an all-ones outcome -> {all_ones}")


if __name__ == "__main__":
    main()
