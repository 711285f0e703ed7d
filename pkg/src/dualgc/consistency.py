"""Cut-and-choose input consistency for the two role-swapped garbled circuits.

For every input wire, its data provider prepares ``s`` independent copies of
the wire's label material. Copy ``j`` holds fresh encodings for both
circuits plus an orientation bit ``b``; it is published as a pair of
commitment sets:

* ``W``  = ( com(K1_0 || K1_1 || K2_b),     com(K2_0 || K2_1 || K1_b) )
* ``W'`` = ( com(K1_0 || K1_1 || K2_{1-b}), com(K2_0 || K2_1 || K1_{1-b}) )

plus one position commitment to ``p = b XOR x`` (``p = 0`` selects ``W`` as
the copy's input set), five commitments per copy in total. A jointly tossed
challenge string marks each copy as a *check* copy (all four input-set
commitments opened, construction verified) or an *evaluation* copy (the
position is opened, then the selected set's first commitment goes to the
first party and its second commitment to the second party). Each party XORs
its evaluation triples into final labels, and a hash-comparison round lets
each party verify that the cross labels it received are consistent with the
encodings the other party received, without learning the input bit.

Failures are publicly arbitrated: a party that claims a bad check copy or a
failed hash comparison must present openings that the providers re-verify
against the broadcast commitments, so a false accusation is attributed to
the accuser and a real inconsistency to the provider.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

from .commitments import (NONCE_BYTES, TAG_COIN, TAG_INPUT_SET,
                          TAG_LABEL_HASH, TAG_POSITION, Commitment, Opening,
                          open_commitment, opened_body, tagged_commit)
from .errors import CoinTossCheatError, OpeningError
from .garbling import LABEL_BYTES, Encoding, xor_bytes

COMMITMENTS_PER_COPY = 5

VERDICT_CHEATING_PROVIDER = "cheating_provider"
VERDICT_CHEATING_PARTY = "cheating_party"
VERDICT_PROOF_INVALID = "proof_invalid"


@dataclass(frozen=True)
class ProofVerdict:
    kind: str
    blamed: str


@dataclass(frozen=True)
class CommitmentSetPair:
    """Public view of one copy: the W / W' sets and the position commitment."""

    w: tuple[Commitment, Commitment]
    w_prime: tuple[Commitment, Commitment]
    position: Commitment


@dataclass(frozen=True)
class CopyMaterial:
    """Provider-side secrets behind one copy's five commitments."""

    enc1: Encoding
    enc2: Encoding
    b: int
    w_openings: tuple[Opening, Opening]
    w_prime_openings: tuple[Opening, Opening]
    position_opening: Opening
    pair: CommitmentSetPair


@dataclass
class WireMaterial:
    """All copies a provider prepared for one input wire."""

    x: int
    copies: list[CopyMaterial]

    @property
    def s(self) -> int:
        return len(self.copies)

    def pairs(self) -> list[CommitmentSetPair]:
        return [c.pair for c in self.copies]

    def check_openings(self, j: int):
        c = self.copies[j]
        return c.w_openings + c.w_prime_openings

    def eval_openings(self, j: int):
        """(position, first->P1, second->P2) openings of the input set."""
        c = self.copies[j]
        chosen = c.w_openings if (c.b ^ self.x) == 0 else c.w_prime_openings
        return c.position_opening, chosen[0], chosen[1]


def _fresh_encoding(rng: random.Random) -> Encoding:
    zero = rng.randbytes(LABEL_BYTES)
    one = rng.randbytes(LABEL_BYTES)
    while one == zero:  # pragma: no cover
        one = rng.randbytes(LABEL_BYTES)
    return Encoding(zero, one)


def _commit_copy(rng: random.Random, enc1: Encoding, enc2: Encoding, b: int,
                 p: int, cross1, cross2) -> CopyMaterial:
    """cross1/cross2 give the (W cross, W' cross) label per circuit."""
    def com(tag, body):
        return tagged_commit(tag, body, rng.randbytes(NONCE_BYTES))

    w_first = com(TAG_INPUT_SET, enc1.zero + enc1.one + cross2[0])
    w_second = com(TAG_INPUT_SET, enc2.zero + enc2.one + cross1[0])
    wp_first = com(TAG_INPUT_SET, enc1.zero + enc1.one + cross2[1])
    wp_second = com(TAG_INPUT_SET, enc2.zero + enc2.one + cross1[1])
    pos = com(TAG_POSITION, bytes([p]))
    pair = CommitmentSetPair(
        w=(w_first[0], w_second[0]),
        w_prime=(wp_first[0], wp_second[0]),
        position=pos[0])
    return CopyMaterial(
        enc1=enc1, enc2=enc2, b=b,
        w_openings=(w_first[1], w_second[1]),
        w_prime_openings=(wp_first[1], wp_second[1]),
        position_opening=pos[1], pair=pair)


def generate_input_material(rng: random.Random, x: int, s: int) -> WireMaterial:
    """Honest provider material for one wire carrying plaintext bit ``x``."""
    if x not in (0, 1):
        raise ValueError("input bit must be 0 or 1")
    if s < 2:
        raise ValueError("need at least two copies")
    copies = []
    for _ in range(s):
        enc1 = _fresh_encoding(rng)
        enc2 = _fresh_encoding(rng)
        b = rng.getrandbits(1)
        copies.append(_commit_copy(
            rng, enc1, enc2, b, b ^ x,
            cross1=(enc1.label(b), enc1.label(1 - b)),
            cross2=(enc2.label(b), enc2.label(1 - b))))
    return WireMaterial(x=x, copies=copies)


def generate_cheating_material(rng: random.Random, x: int, s: int,
                               consistent: list[bool]) -> WireMaterial:
    """Material where copies with ``consistent[j] == False`` feed bit ``1-x``
    to the first party's circuit-2 cross while keeping everything else
    honest: the classic input-inconsistency attack. A tampered copy fails
    the construction check if opened, and mixing tampered with honest
    copies in the evaluation set trips the hash-comparison round.
    """
    if len(consistent) != s:
        raise ValueError("need one consistency flag per copy")
    copies = []
    for j in range(s):
        enc1 = _fresh_encoding(rng)
        enc2 = _fresh_encoding(rng)
        b = rng.getrandbits(1)
        p = b ^ x
        cross1 = [enc1.label(b), enc1.label(1 - b)]
        cross2 = [enc2.label(b), enc2.label(1 - b)]
        if not consistent[j]:
            # Flip only the circuit-2 cross inside the selected input set.
            cross2[p] = enc2.label(1 - x)
            cross1[p] = enc1.label(x)
        copies.append(_commit_copy(rng, enc1, enc2, b, p,
                                   tuple(cross1), tuple(cross2)))
    return WireMaterial(x=x, copies=copies)


# --- challenge coin toss -----------------------------------------------------

def pack_bits(bits) -> bytes:
    out = bytearray((len(bits) + 7) // 8)
    for i, bit in enumerate(bits):
        if bit:
            out[i >> 3] |= 0x80 >> (i & 7)
    return bytes(out)


def unpack_bits(data: bytes, count: int) -> list[int]:
    return [(data[i >> 3] >> (7 - (i & 7))) & 1 for i in range(count)]


def coin_toss_commit(rng: random.Random, s: int):
    """Draw a challenge share and commit to it; returns (share, commitment,
    opening)."""
    share = [rng.getrandbits(1) for _ in range(s)]
    commitment, opening = tagged_commit(TAG_COIN, pack_bits(share),
                                        rng.randbytes(NONCE_BYTES))
    return share, commitment, opening


def coin_toss_open(commitment: Commitment, opening: Opening, s: int,
                   party: str) -> list[int]:
    """Verify a counterpart's reveal against its commitment."""
    if not open_commitment(commitment, opening):
        raise CoinTossCheatError("challenge share reveal does not match its "
                                 "commitment", party=party)
    try:
        body = opened_body(TAG_COIN, opening)
    except ValueError:
        raise CoinTossCheatError("malformed challenge share reveal",
                                 party=party)
    if len(body) != (s + 7) // 8:
        raise CoinTossCheatError("challenge share has the wrong length",
                                 party=party)
    return unpack_bits(body, s)


def combine_challenge(share1, share2) -> list[int] | None:
    """XOR the two shares; None demands a re-toss (degenerate challenge)."""
    rho = [a ^ b for a, b in zip(share1, share2)]
    if all(rho) or not any(rho):
        return None
    return rho


# --- construction check (check copies) --------------------------------------

def _parse_triple(opening: Opening):
    body = opened_body(TAG_INPUT_SET, opening)
    if len(body) != 3 * LABEL_BYTES:
        raise ValueError("input-set opening must hold three labels")
    return (body[:LABEL_BYTES], body[LABEL_BYTES:2 * LABEL_BYTES],
            body[2 * LABEL_BYTES:])


def _set_orientation(first, second) -> int | None:
    """The bit both crosses point at, or None if the set is malformed."""
    k11, k12, k13 = first
    k21, k22, k23 = second
    if k11 == k12 or k21 == k22:
        return None
    if k23 == k11 and k13 == k21:
        return 0
    if k23 == k12 and k13 == k22:
        return 1
    return None


def check_pair_construction(pair: CommitmentSetPair, openings) -> str | None:
    """Verify a check copy's four openings; None when well constructed."""
    commitments = pair.w + pair.w_prime
    if len(openings) != 4:
        return "expected four input-set openings"
    for com, op in zip(commitments, openings):
        if not open_commitment(com, op):
            return "opening does not match the broadcast commitment"
    try:
        triples = [_parse_triple(op) for op in openings]
    except ValueError:
        return "malformed input-set opening"
    b_w = _set_orientation(triples[0], triples[1])
    b_wp = _set_orientation(triples[2], triples[3])
    if b_w is None or b_wp is None:
        return "cross labels do not agree on a bit value"
    if b_wp != 1 - b_w:
        return "the two sets of a pair must commit to opposite bit values"
    if triples[0][:2] != triples[2][:2] or triples[1][:2] != triples[3][:2]:
        return "the two sets of a pair must share their encodings"
    return None


def verify_check_failure_claim(pair: CommitmentSetPair, openings) -> ProofVerdict:
    """Arbitrate a party's claim that a check copy was badly constructed.

    The openings must match the provider's broadcast commitments (otherwise
    the claim is fabricated) and must actually fail the construction check.
    ``blamed`` is filled in by the caller, who knows the role names.
    """
    commitments = pair.w + pair.w_prime
    if len(openings) != 4 or not all(
            open_commitment(c, o) for c, o in zip(commitments, openings)):
        return ProofVerdict(VERDICT_PROOF_INVALID, "claimant")
    if check_pair_construction(pair, tuple(openings)) is None:
        return ProofVerdict(VERDICT_PROOF_INVALID, "claimant")
    return ProofVerdict(VERDICT_CHEATING_PROVIDER, "provider")


# --- evaluation copies -------------------------------------------------------

def open_position(pair: CommitmentSetPair, opening: Opening) -> int | None:
    if not open_commitment(pair.position, opening):
        return None
    try:
        body = opened_body(TAG_POSITION, opening)
    except ValueError:
        return None
    if len(body) != 1 or body[0] not in (0, 1):
        return None
    return body[0]


def open_eval_triple(pair: CommitmentSetPair, position: int, slot: int,
                     opening: Opening):
    """Open one commitment of the copy's input set.

    ``slot`` 0 is the first commitment (first party), 1 the second. Returns
    the (label0, label1, cross) triple, or None when the opening fails.
    """
    chosen = pair.w if position == 0 else pair.w_prime
    if not open_commitment(chosen[slot], opening):
        return None
    try:
        return _parse_triple(opening)
    except ValueError:
        return None


def evaluate_final_labels(triples):
    """XOR per-copy triples into (own-circuit encoding, other-circuit label)."""
    zero = bytes(LABEL_BYTES)
    k1 = k2 = k3 = zero
    for a, b, c in triples:
        k1 = xor_bytes(k1, a)
        k2 = xor_bytes(k2, b)
        k3 = xor_bytes(k3, c)
    return Encoding(k1, k2), k3


# --- label consistency check -------------------------------------------------

def hash_label(label: bytes) -> bytes:
    return hashlib.sha256(label).digest()


@dataclass(frozen=True)
class HashTuple:
    """One party's broadcast for one wire: the permuted aggregate hashes of
    its encoding halves, commitments to the per-copy hash lists behind them,
    and a commitment to the hash list of its received cross labels."""

    h_pair: tuple[bytes, bytes]
    c_pair: tuple[Commitment, Commitment]
    c_cross: Commitment


@dataclass
class HashTupleSecret:
    hash_lists: tuple[list[bytes], list[bytes], list[bytes]]
    openings: tuple[Opening, Opening, Opening]


def make_hash_tuple(rng: random.Random, triples) -> tuple[HashTuple, HashTupleSecret]:
    """Build a party's wire broadcast from its evaluation triples."""
    lists = ([hash_label(t[0]) for t in triples],
             [hash_label(t[1]) for t in triples],
             [hash_label(t[2]) for t in triples])
    coms = [tagged_commit(TAG_LABEL_HASH, b"".join(lst),
                          rng.randbytes(NONCE_BYTES)) for lst in lists]
    aggregates = [_xor_all(lst) for lst in lists]
    perm = rng.getrandbits(1)
    order = (1, 0) if perm else (0, 1)
    tup = HashTuple(
        h_pair=(aggregates[order[0]], aggregates[order[1]]),
        c_pair=(coms[order[0]][0], coms[order[1]][0]),
        c_cross=coms[2][0])
    secret = HashTupleSecret(
        hash_lists=(lists[order[0]], lists[order[1]], lists[2]),
        openings=(coms[order[0]][1], coms[order[1]][1], coms[2][1]))
    return tup, secret


def _xor_all(hashes) -> bytes:
    acc = bytes(32)
    for h in hashes:
        acc = xor_bytes(acc, h)
    return acc


def cross_hash_aggregate(triples) -> bytes:
    return _xor_all([hash_label(t[2]) for t in triples])


def label_check_passes(own_cross_aggregate: bytes, other: HashTuple) -> bool:
    return own_cross_aggregate in other.h_pair


@dataclass(frozen=True)
class ConsistencyProof:
    """A party's public evidence that a wire failed the hash comparison."""

    provider: int
    wire: int
    h_triple: tuple[bytes, bytes, bytes]
    c_triple: tuple[Commitment, Commitment, Commitment]


def issue_consistency_proof(provider: int, wire: int, other: HashTuple,
                            own_cross_aggregate: bytes,
                            own_c_cross: Commitment) -> ConsistencyProof:
    return ConsistencyProof(
        provider=provider, wire=wire,
        h_triple=(other.h_pair[0], other.h_pair[1], own_cross_aggregate),
        c_triple=(other.c_pair[0], other.c_pair[1], own_c_cross))


def _parse_hash_list(opening: Opening, party: str) -> list[bytes]:
    try:
        body = opened_body(TAG_LABEL_HASH, opening)
    except ValueError:
        raise OpeningError("malformed hash-list opening", party=party)
    if not body or len(body) % 32:
        raise OpeningError("hash list must be whole 32-byte entries", party=party)
    return [body[i:i + 32] for i in range(0, len(body), 32)]


def verify_consistency_proof(proof: ConsistencyProof, complainer: str,
                             garbler: str, complainer_tuple: HashTuple,
                             garbler_tuple: HashTuple, pair_openings,
                             cross_opening: Opening) -> ProofVerdict:
    """A provider's arbitration of a hash-comparison failure proof.

    ``garbler`` is the party whose broadcast pair the proof questions;
    ``complainer`` issued the proof. The openings come from those parties on
    request. The verdict either confirms the named provider cheated, rejects
    the proof (a false alarm is the complainer's fault), or catches a party
    presenting data inconsistent with the broadcast transcript.
    """
    stated = proof.h_triple
    if stated[2] in (stated[0], stated[1]):
        return ProofVerdict(VERDICT_PROOF_INVALID, complainer)
    if (proof.c_triple[:2] != garbler_tuple.c_pair
            or stated[:2] != garbler_tuple.h_pair
            or proof.c_triple[2] != complainer_tuple.c_cross):
        return ProofVerdict(VERDICT_CHEATING_PARTY, complainer)
    for com, opening, party in ((proof.c_triple[0], pair_openings[0], garbler),
                                (proof.c_triple[1], pair_openings[1], garbler),
                                (proof.c_triple[2], cross_opening, complainer)):
        if not open_commitment(com, opening):
            raise OpeningError("hash-list opening does not match the "
                               "broadcast commitment", party=party)
    lists = [_parse_hash_list(pair_openings[0], garbler),
             _parse_hash_list(pair_openings[1], garbler),
             _parse_hash_list(cross_opening, complainer)]
    if len({len(lst) for lst in lists}) != 1:
        return ProofVerdict(VERDICT_CHEATING_PARTY, garbler)
    for lst, expect, party in zip(lists, stated, (garbler, garbler, complainer)):
        if _xor_all(lst) != expect:
            return ProofVerdict(VERDICT_CHEATING_PARTY, party)
    cross = lists[2]
    if all(h == g for h, g in zip(cross, lists[0])) or \
            all(h == g for h, g in zip(cross, lists[1])):
        return ProofVerdict(VERDICT_PROOF_INVALID, complainer)
    return ProofVerdict(VERDICT_CHEATING_PROVIDER, f"provider:{proof.provider}")
