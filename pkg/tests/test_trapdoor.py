"""Toy trapdoor family: evaluation, inversion, labels, decoding."""
import json

import pytest

from cvqc import trapdoor
from cvqc.protocol import messages


def test_eval_identity_and_two_to_one():
    assert trapdoor.eval_fn(0, 1, 0) == (1, 0)
    assert trapdoor.eval_fn(1, 0, 1) == (1, 0)
    assert trapdoor.eval_fn(1, 1, 1) == (0, 0)
    assert trapdoor.eval_fn(1, 0, 0) == (0, 0)
    assert trapdoor.eval_fn(1, 1, 0) == (1, 0)


def test_eval_validates_inputs():
    with pytest.raises(ValueError):
        trapdoor.eval_fn(2, 0, 0)
    with pytest.raises(ValueError):
        trapdoor.eval_fn(0, 0, 2)


def test_two_to_one_structure_exhaustive():
    counts = {}
    for b in (0, 1):
        for w in (0, 1):
            counts.setdefault(trapdoor.eval_fn(1, b, w), []).append((b, w))
    assert set(counts) == {(0, 0), (1, 0)}
    assert all(len(v) == 2 for v in counts.values())
    images = {trapdoor.eval_fn(0, b, w) for b in (0, 1) for w in (0, 1)}
    assert len(images) == 4  # y_0 is a bijection


def test_invert_round_trip():
    for k in (0, 1):
        key = trapdoor.TrapdoorKeyPair.generate(k)
        for b in (0, 1):
            for w in (0, 1):
                assert (b, w) in key.invert(trapdoor.eval_fn(k, b, w))


def test_invert_cardinalities():
    key0 = trapdoor.TrapdoorKeyPair.generate(0)
    assert key0.invert((1, 0)) == ((1, 0),)
    key1 = trapdoor.TrapdoorKeyPair.generate(1)
    assert key1.invert((0, 0)) == ((0, 0), (1, 1))
    assert key1.invert((1, 0)) == ((0, 1), (1, 0))
    assert key1.invert((0, 1)) == ()
    assert key1.invert((1, 1)) == ()


def test_commitment_validity():
    key1 = trapdoor.TrapdoorKeyPair.generate(1)
    assert key1.commitment_valid((0, 0)) and key1.commitment_valid((1, 0))
    assert not key1.commitment_valid((0, 1)) and not key1.commitment_valid((1, 1))
    key0 = trapdoor.TrapdoorKeyPair.generate(0)
    assert all(key0.commitment_valid((a, b)) for a in (0, 1) for b in (0, 1))


def test_label_for_pauli():
    assert trapdoor.label_for_pauli("Z") == 0
    assert trapdoor.label_for_pauli("I") == 0
    assert trapdoor.label_for_pauli("X") == 1
    with pytest.raises(ValueError):
        trapdoor.label_for_pauli("Y")


def test_decode_one_to_one_ignores_cd():
    key = trapdoor.TrapdoorKeyPair.generate(0)
    for c in (0, 1):
        for d in (0, 1):
            assert key.decode((1, 0), c, d) == 1
            assert key.decode((0, 1), c, d) == 0


def test_decode_two_to_one_formula():
    key = trapdoor.TrapdoorKeyPair.generate(1)
    # ybar = 00: preimages (0,0),(1,1) so x0 XOR x1 = 1
    assert key.decode((0, 0), 1, 1) == 0
    assert key.decode((0, 0), 1, 0) == 1
    # d = 0 makes m = c regardless of the preimages
    assert key.decode((1, 0), 0, 0) == 0
    assert key.decode((1, 0), 1, 0) == 1


def test_decode_fails_without_preimages():
    key = trapdoor.TrapdoorKeyPair.generate(1)
    with pytest.raises(ValueError):
        key.decode((0, 1), 0, 0)


def test_wire_form_is_label_only():
    key = trapdoor.TrapdoorKeyPair.generate(1)
    assert key.public() == {"k": 1}
    assert json.dumps(key.public()) == '{"k": 1}'


def test_wire_encoder_refuses_key_objects():
    key = trapdoor.TrapdoorKeyPair.generate(1)
    msg = {"type": "KEYS", "k1": 1, "k2": key}
    with pytest.raises(messages.ProtocolError):
        messages.encode(msg)


def test_repr_hides_table():
    key = trapdoor.TrapdoorKeyPair.generate(1)
    assert "_table" not in repr(key)
    assert "(0, 0)" not in repr(key)
