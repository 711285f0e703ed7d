"""Output verification tests: dual decode, rejection, failure arbitration."""

import random

from dualgc.commitments import Opening
from dualgc.outputs import (ACCEPT, BLAME, COMMITMENTS_PER_RECIPIENT,
                            CONFIRMED, REJECT, SPURIOUS, FailureProof,
                            OutputCommitments, OutputDecision, OutputOpenings,
                            bundle_digest, commit_output_encodings,
                            commit_output_labels, parse_output_encodings,
                            parse_output_labels, verify_failure_proof,
                            verify_output)
from dualgc.garbling import Encoding


def fresh_encodings(rng, wires):
    return [Encoding(rng.randbytes(16), rng.randbytes(16)) for _ in range(wires)]


def build_reveal(rng, bits, enc1=None, enc2=None, labels1=None, labels2=None):
    """Honest two-circuit output material for one recipient."""
    wires = len(bits)
    enc1 = enc1 or fresh_encodings(rng, wires)
    enc2 = enc2 or fresh_encodings(rng, wires)
    labels1 = labels1 or [enc1[i].label(bits[i]) for i in range(wires)]
    labels2 = labels2 or [enc2[i].label(bits[i]) for i in range(wires)]
    ce1, oe1 = commit_output_encodings(rng, enc1)
    ce2, oe2 = commit_output_encodings(rng, enc2)
    co1, ol1 = commit_output_labels(rng, labels1)
    co2, ol2 = commit_output_labels(rng, labels2)
    coms = OutputCommitments(e1=ce1, o1=co1, e2=ce2, o2=co2)
    ops = OutputOpenings(e1=oe1, o1=ol1, e2=oe2, o2=ol2)
    return coms, ops


def test_honest_reveal_accepts_with_decoded_bits():
    rng = random.Random(1)
    for bits in ([0], [1, 0, 1], [1] * 8):
        coms, ops = build_reveal(rng, bits)
        decision = verify_output(coms, ops, len(bits))
        assert decision == OutputDecision(ACCEPT, value=tuple(bits))


def test_disagreeing_circuits_reject():
    rng = random.Random(2)
    enc2 = fresh_encodings(rng, 3)
    labels2 = [enc2[0].label(1), enc2[1].label(0), enc2[2].label(1)]
    coms, ops = build_reveal(rng, [0, 0, 1], enc2=enc2, labels2=labels2)
    decision = verify_output(coms, ops, 3)
    assert decision.status == REJECT and decision.value is None


def test_foreign_label_rejects():
    rng = random.Random(3)
    coms, ops = build_reveal(rng, [1, 1], labels1=[rng.randbytes(16)] * 2)
    assert verify_output(coms, ops, 2).status == REJECT


def test_degenerate_encoding_blames_its_garbler():
    rng = random.Random(4)
    lab = rng.randbytes(16)
    coms, ops = build_reveal(rng, [0, 1],
                             enc1=[Encoding(lab, lab),
                                   Encoding(rng.randbytes(16), rng.randbytes(16))],
                             labels1=[lab, bytes(16)])
    decision = verify_output(coms, ops, 2)
    assert decision.status == BLAME and decision.blamed == "P1"
    coms, ops = build_reveal(rng, [0], enc2=[Encoding(lab, lab)], labels2=[lab])
    decision = verify_output(coms, ops, 1)
    assert decision.status == BLAME and decision.blamed == "P2"


def test_unbound_opening_blames_its_sender():
    rng = random.Random(5)
    coms, ops = build_reveal(rng, [1, 0])
    _, other = build_reveal(rng, [1, 0])
    forged = OutputOpenings(e1=other.e1, o1=ops.o1, e2=ops.e2, o2=ops.o2)
    decision = verify_output(coms, forged, 2)
    assert decision.status == BLAME and decision.blamed == "P1"
    forged = OutputOpenings(e1=ops.e1, o1=other.o1, e2=ops.e2, o2=ops.o2)
    decision = verify_output(coms, forged, 2)
    assert decision.status == BLAME and decision.blamed == "P2"


def test_wrong_width_blames():
    rng = random.Random(6)
    coms, ops = build_reveal(rng, [1, 0, 1])
    assert verify_output(coms, ops, 2).status == BLAME


def test_parse_helpers():
    rng = random.Random(7)
    enc = fresh_encodings(rng, 2)
    _, opening = commit_output_encodings(rng, enc)
    assert parse_output_encodings(opening, 2) == enc
    assert parse_output_encodings(opening, 3) is None
    labels = [e.zero for e in enc]
    _, opening = commit_output_labels(rng, labels)
    assert parse_output_labels(opening, 2) == labels
    assert parse_output_labels(opening, 1) is None
    bad = Opening(message=b"\x07" + b"x" * 64, randomness=bytes(16))
    assert parse_output_encodings(bad, 2) is None
    assert parse_output_labels(bad, 4) is None


def test_failure_proof_confirmed_on_real_mismatch():
    rng = random.Random(8)
    enc2 = fresh_encodings(rng, 2)
    coms, ops = build_reveal(rng, [1, 1], enc2=enc2,
                             labels2=[enc2[0].label(0), enc2[1].label(1)])
    assert verify_output(coms, ops, 2).status == REJECT
    proof = FailureProof(recipient=0, openings=ops)
    assert verify_failure_proof(coms, proof, 2) == CONFIRMED


def test_failure_proof_spurious_when_decodes_agree():
    rng = random.Random(9)
    coms, ops = build_reveal(rng, [0, 1])
    proof = FailureProof(recipient=1, openings=ops)
    assert verify_failure_proof(coms, proof, 2) == SPURIOUS


def test_failure_proof_with_tampered_openings_is_spurious():
    rng = random.Random(10)
    coms, ops = build_reveal(rng, [0, 1])
    _, other = build_reveal(rng, [1, 0])
    proof = FailureProof(recipient=0, openings=other)
    assert verify_failure_proof(coms, proof, 2) == SPURIOUS


def test_failure_proof_confirmed_on_degenerate_material():
    # A party that published a degenerate encoding is a genuine protocol
    # failure, so forwarding those openings must confirm.
    rng = random.Random(11)
    lab = rng.randbytes(16)
    coms, ops = build_reveal(rng, [0], enc1=[Encoding(lab, lab)], labels1=[lab])
    proof = FailureProof(recipient=0, openings=ops)
    assert verify_failure_proof(coms, proof, 1) == CONFIRMED


def test_bundle_digest_depends_on_every_commitment():
    rng = random.Random(12)
    bundles = [build_reveal(rng, [0, 1])[0] for _ in range(3)]
    assert len(bundles) * COMMITMENTS_PER_RECIPIENT == 12
    base = bundle_digest(bundles)
    assert base == bundle_digest(list(bundles))
    assert bundle_digest(bundles[::-1]) != base
    swapped = [bundles[1], bundles[0], bundles[2]]
    assert bundle_digest(swapped) != base
