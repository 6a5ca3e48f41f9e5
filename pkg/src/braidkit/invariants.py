"""Linear braid invariants: CEP, CES2, CES1 and the complete flat-braid invariant."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .core import (
    BraidWord,
    EncodedBraid,
    EncodingError,
    FlatWord,
    crossing_strands,
    encode,
    permutation_of,
)

# Complete invariant of 3-strand flat braids, paired with the canonical flat
# word having pairwise distinct ES2 columns.  (1,2,1) and (2,1,2) coincide.
FLAT_CANONICAL: dict[tuple[int, int, int], tuple[int, ...]] = {
    (0, 0, 0): (),
    (1, 1, 0): (1,),
    (0, 1, 1): (2,),
    (-1, 1, 0): (2, 1),
    (0, 1, -1): (1, 2),
    (0, 2, 0): (1, 2, 1),
}
FLAT_INVARIANT_VALUES = tuple(FLAT_CANONICAL)


def alternating_signs(k: int) -> np.ndarray:
    """The column of +1, -1, +1, ... of length k (first column counted as odd)."""
    s = np.ones(k, dtype=np.int64)
    s[1::2] = -1
    return s


def alternating_row_sums(enc: EncodedBraid) -> tuple[int, ...]:
    if enc.encoding not in ("ES2", "ES1"):
        raise EncodingError(f"alternating row sums are defined for ES encodings, not {enc.encoding}")
    return tuple(int(v) for v in enc.matrix.astype(np.int64) @ alternating_signs(enc.k))


def ep1_sum(word: BraidWord) -> int:
    """Sum of all EP1 entries, i.e. the exponent sum of the word."""
    return sum(1 if g > 0 else -1 for g in word.letters)


def check_cep(word: BraidWord) -> tuple[bool, int]:
    s = ep1_sum(word)
    return s == 0, s


def es2_sums(word: BraidWord) -> tuple[int, int, int]:
    """Alternating row sums of ES2, accumulated during strand simulation.

    Equivalent to ``alternating_row_sums(encode(word, "ES2"))`` but avoids
    materialising the matrix; the pipeline uses this on its hot path.
    """
    n = word.strands
    sums = [0] * n
    occupant = list(range(n))
    sign = 1
    for g in word.letters:
        i = abs(g) - 1
        top, bottom = occupant[i], occupant[i + 1]
        if g > 0:
            sums[top] += sign
            sums[bottom] -= sign
        else:
            sums[bottom] += sign
            sums[top] -= sign
        occupant[i], occupant[i + 1] = bottom, top
        sign = -sign
    return tuple(sums)


def es1_sums(word: BraidWord) -> tuple[int, int, int]:
    if word.strands != 3:
        raise EncodingError("ES1 is only defined for 3 strands")
    sums = [0, 0, 0]
    sign = 1
    for over, under in crossing_strands(word):
        pair = {over, under}
        if pair == {1, 2}:
            sums[0] += sign if over == 1 else -sign
        elif pair == {2, 3}:
            sums[1] += sign if over == 2 else -sign
        else:
            sums[2] += sign if over == 3 else -sign
        sign = -sign
    return tuple(sums)


def check_ces(word: BraidWord, which: str = "CES2") -> bool:
    which = which.upper()
    if word.strands != 3:
        raise EncodingError("CES conditions are defined for 3 strands")
    if which == "CES2":
        return not any(es2_sums(word))
    if which == "CES1":
        return not any(es1_sums(word))
    raise ValueError(f"unknown condition {which!r}")


def is_pure(word: BraidWord | FlatWord) -> bool:
    perm = permutation_of(word)
    return perm == tuple(range(1, word.strands + 1))


@dataclass(frozen=True)
class FlatInvariant:
    value: tuple[int, int, int]
    canonical: FlatWord
    permutation: tuple[int, ...]


def flat_invariant(word: FlatWord) -> FlatInvariant:
    if word.strands != 3:
        raise EncodingError("the flat invariant is defined for 3 strands")
    value = alternating_row_sums(encode(word, "ES2"))
    canonical = FlatWord(3, FLAT_CANONICAL[value])
    return FlatInvariant(value, canonical, permutation_of(canonical))


def flat_equal(u: FlatWord, v: FlatWord) -> bool:
    return flat_invariant(u).value == flat_invariant(v).value


def is_realizable_flat(matrix) -> tuple[bool, int | None]:
    """Prefix test for a flat 3-row ES2 matrix.

    Returns ``(True, None)`` or ``(False, m)`` with ``m`` the smallest 1-based
    prefix length whose alternating row sums fall outside the six flat values.
    """
    if isinstance(matrix, EncodedBraid):
        matrix = matrix.matrix
    m = np.asarray(matrix, dtype=np.int64)
    if m.size == 0:
        return True, None
    if m.ndim != 2 or m.shape[0] != 3:
        raise EncodingError("expected a 3-row flat ES2 matrix")
    for j in range(m.shape[1]):
        col = m[:, j]
        if not (np.all((col == 0) | (col == 1)) and col.sum() == 2):
            raise EncodingError(f"column {j + 1} must hold exactly two 1s")
    prefix = np.cumsum(m * alternating_signs(m.shape[1]), axis=1)
    allowed = set(FLAT_INVARIANT_VALUES)
    for j in range(m.shape[1]):
        if tuple(int(v) for v in prefix[:, j]) not in allowed:
            return False, j + 1
    return True, None


@dataclass(frozen=True)
class ConditionReport:
    cep: bool
    ces2: bool
    ces1: bool
    ep1_sum: int
    es2_sums: tuple[int, int, int]
    es1_sums: tuple[int, int, int]

    def to_json(self) -> dict:
        d = asdict(self)
        d["es2_sums"] = list(self.es2_sums)
        d["es1_sums"] = list(self.es1_sums)
        return d


def condition_report(word: BraidWord) -> ConditionReport:
    cep, s = check_cep(word)
    e2 = es2_sums(word)
    e1 = es1_sums(word)
    ces2 = not any(e2)
    ces1 = not any(e1)
    # Identities proven for every 3-strand braid; a failure here is a bug.
    assert ces1 == (cep and ces2), (word, e1, e2, s)
    assert s == sum(e1), (word, e1, s)
    return ConditionReport(cep, ces2, ces1, s, e2, e1)
