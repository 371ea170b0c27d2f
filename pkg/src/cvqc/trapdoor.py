"""Toy trapdoor function family on 2-bit strings.

Two functions, labeled by k: y_0 is the identity (one-to-one) and y_1 is
two-to-one with y_1(b, w) = (b XOR w, 0). The verifier holds a key pair whose
private half (a full preimage table; adequate at 2 bits) inverts outputs. The
label alone crosses the wire: the prover-facing serialization is {"k": k} and
the wire encoder hard-fails on any attempt to emit key material.

At this toy scale the family provides no cryptographic hardness; the
information-flow discipline (eval without the key, invert only with it) is
enforced structurally instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field

VALID_RANGE_K1 = ((0, 0), (1, 0))


def eval_fn(k: int, b: int, w: int) -> tuple[int, int]:
    """Evaluate y_k on the 2-bit input (b, w)."""
    if k not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {k}")
    if b not in (0, 1) or w not in (0, 1):
        raise ValueError(f"inputs must be bits, got ({b}, {w})")
    if k == 0:
        return (b, w)
    return (b ^ w, 0)


def label_for_pauli(p: str) -> int:
    """Measurement label for a single-qubit factor: Z/I -> 0, X -> 1."""
    if p in ("Z", "I"):
        return 0
    if p == "X":
        return 1
    raise ValueError(f"unsupported single-qubit factor {p!r}; only I, Z, X occur")


@dataclass(frozen=True)
class TrapdoorKeyPair:
    """Function label plus the private inversion table.

    `_table` maps each output to the tuple of preimages, ordered by the first
    input bit. It never leaves the verifier: repr hides it and the wire
    serializer rejects the object outright.
    """

    k: int
    _table: dict = field(repr=False)

    @classmethod
    def generate(cls, k: int) -> "TrapdoorKeyPair":
        table: dict[tuple[int, int], tuple] = {}
        for b in (0, 1):
            for w in (0, 1):
                table.setdefault(eval_fn(k, b, w), ())
                table[eval_fn(k, b, w)] += ((b, w),)
        return cls(k, table)

    def public(self) -> dict:
        """The only serializable view of the key: the label."""
        return {"k": self.k}

    def invert(self, y_bar: tuple[int, int]) -> tuple[tuple[int, int], ...]:
        """Preimage set of y_bar; empty for out-of-range two-to-one outputs."""
        y = (int(y_bar[0]), int(y_bar[1]))
        pre = self._table.get(y, ())
        return tuple(sorted(pre))

    def commitment_valid(self, y_bar: tuple[int, int]) -> bool:
        """k=0 accepts any 2-bit string; k=1 only the range {00, 10}."""
        if self.k == 0:
            return True
        return tuple(y_bar) in VALID_RANGE_K1

    def decode(self, y_bar: tuple[int, int], c: int, d: int) -> int:
        """Effective measurement outcome m in a measurement round.

        k=0 (effective Z measurement): m is the first bit of the unique
        preimage; (c, d) are ignored. k=1 (effective X measurement):
        m = c XOR d*(x0 XOR x1) where (0, x0), (1, x1) are the two preimages.
        """
        pre = self.invert(y_bar)
        if self.k == 0:
            if len(pre) != 1:
                raise ValueError(f"one-to-one inversion failed for {y_bar}")
            return pre[0][0]
        if len(pre) != 2:
            raise ValueError(f"commitment {tuple(y_bar)} has no preimages")
        (b0, x0), (b1, x1) = pre
        assert (b0, b1) == (0, 1)
        return (c ^ (d & (x0 ^ x1))) & 1
