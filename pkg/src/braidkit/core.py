"""Braid and flat-braid words, strand simulation and the four matrix encodings.

A braid word is stored as a tuple of signed generator indices: ``+i`` is the
clockwise half-turn of the strands at positions ``i, i+1`` and ``-i`` its
inverse.  Matrices are derived views of a word and are never the primary state.

Encodings (``n`` strands, ``k`` crossings, one column per crossing):

* ``EP1``  ``n-1`` rows, the sign of the crossing in the row of its position.
* ``EP2``  ``n`` rows, ``+1`` at position ``i`` and ``-1`` at ``i+1`` for
  ``sigma_i`` (negated for the inverse).
* ``ES2``  ``n`` rows indexed by strand, ``+1`` for the strand passing over
  and ``-1`` for the strand passing under.
* ``ES1``  three strands only; rows record the pairs (1,2), (2,3), (3,1) and
  hold ``+1`` when the former strand passes above the latter.

Flat variants replace every ``-1`` by ``1``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

ENCODINGS = ("EP1", "EP2", "ES2", "ES1")

# EP1 = EP1_FROM_EP2 @ EP2, EP2 = EP2_FROM_EP1 @ EP1, ES2 = ES2_FROM_ES1 @ ES1
EP1_FROM_EP2 = np.array([[1, 0, 0], [0, 0, -1]], dtype=np.int64)
EP2_FROM_EP1 = np.array([[1, 0], [-1, 1], [0, -1]], dtype=np.int64)
ES2_FROM_ES1 = np.array([[1, 0, -1], [-1, 1, 0], [0, -1, 1]], dtype=np.int64)

# ES1 row of an unordered strand pair, with the "former" strand of that row.
_ES1_ROWS = {frozenset((1, 2)): (0, 1), frozenset((2, 3)): (1, 2), frozenset((3, 1)): (2, 3)}


class EncodingError(ValueError):
    """Unsupported encoding request or malformed matrix."""


@dataclass(frozen=True)
class BraidWord:
    strands: int
    letters: tuple[int, ...]

    def __post_init__(self):
        if self.strands < 2:
            raise ValueError(f"need at least 2 strands, got {self.strands}")
        object.__setattr__(self, "letters", tuple(int(g) for g in self.letters))
        for g in self.letters:
            if g == 0 or abs(g) >= self.strands:
                raise ValueError(f"generator {g} invalid on {self.strands} strands")

    def __len__(self) -> int:
        return len(self.letters)

    def __add__(self, other: BraidWord) -> BraidWord:
        if other.strands != self.strands:
            raise ValueError("cannot concatenate words on different strand counts")
        return BraidWord(self.strands, self.letters + other.letters)

    def inverse(self) -> BraidWord:
        return BraidWord(self.strands, tuple(-g for g in reversed(self.letters)))

    def __str__(self) -> str:
        return format_word(self)


@dataclass(frozen=True)
class FlatWord:
    strands: int
    positions: tuple[int, ...]

    def __post_init__(self):
        if self.strands < 2:
            raise ValueError(f"need at least 2 strands, got {self.strands}")
        object.__setattr__(self, "positions", tuple(int(p) for p in self.positions))
        for p in self.positions:
            if not 1 <= p < self.strands:
                raise ValueError(f"position {p} invalid on {self.strands} strands")

    def __len__(self) -> int:
        return len(self.positions)

    def __str__(self) -> str:
        return format_word(self)


Word = Union[BraidWord, FlatWord]


@dataclass(frozen=True, eq=False)
class EncodedBraid:
    """An encoding matrix plus its tag.  The matrix is a read-only int8 array."""

    encoding: str
    flat: bool
    matrix: np.ndarray

    def __post_init__(self):
        if self.encoding not in ENCODINGS:
            raise EncodingError(f"unknown encoding {self.encoding!r}")
        m = np.array(self.matrix, dtype=np.int8)
        if m.ndim != 2:
            raise EncodingError("encoding matrix must be 2-dimensional")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def k(self) -> int:
        return self.matrix.shape[1]

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    def __eq__(self, other):
        if not isinstance(other, EncodedBraid):
            return NotImplemented
        return (
            self.encoding == other.encoding
            and self.flat == other.flat
            and self.matrix.shape == other.matrix.shape
            and bool(np.array_equal(self.matrix, other.matrix))
        )

    def __hash__(self):
        return hash((self.encoding, self.flat, self.matrix.shape, self.matrix.tobytes()))

    def tolist(self) -> list[list[int]]:
        return self.matrix.tolist()

    def __str__(self) -> str:
        return format_matrix(self.matrix)


def _rows_for(encoding: str, strands: int) -> int:
    return strands - 1 if encoding == "EP1" else strands


def _signed_letters(word: Word) -> tuple[int, ...]:
    if isinstance(word, BraidWord):
        return word.letters
    return word.positions


def encode(word: Word, encoding: str) -> EncodedBraid:
    """Encode a braid or flat word as a matrix with one column per crossing."""
    encoding = encoding.upper()
    if encoding not in ENCODINGS:
        raise EncodingError(f"unknown encoding {encoding!r}")
    n = word.strands
    if encoding == "ES1" and n != 3:
        raise EncodingError("ES1 is only defined for 3 strands")
    flat = isinstance(word, FlatWord)
    letters = _signed_letters(word)
    m = np.zeros((_rows_for(encoding, n), len(letters)), dtype=np.int8)

    if encoding == "EP1":
        for j, g in enumerate(letters):
            m[abs(g) - 1, j] = 1 if g > 0 else -1
    elif encoding == "EP2":
        for j, g in enumerate(letters):
            i = abs(g) - 1
            s = 1 if g > 0 else -1
            m[i, j] = s
            m[i + 1, j] = -s
    else:
        for j, (over, under) in enumerate(crossing_strands(word)):
            if encoding == "ES2":
                m[over - 1, j] = 1
                m[under - 1, j] = -1
            else:
                row, former = _ES1_ROWS[frozenset((over, under))]
                m[row, j] = 1 if over == former else -1
    if flat:
        m = np.abs(m)
    return EncodedBraid(encoding, flat, m)


def crossing_strands(word: Word) -> list[tuple[int, int]]:
    """(over, under) strand labels for each crossing, simulated left to right.

    For ``sigma_i`` the strand at position ``i`` passes over; for the inverse
    the strand at position ``i+1`` does.  Flat words use the positive rule.
    """
    occupant = list(range(1, word.strands + 1))
    out = []
    for g in _signed_letters(word):
        i = abs(g) - 1
        top, bottom = occupant[i], occupant[i + 1]
        out.append((top, bottom) if g > 0 else (bottom, top))
        occupant[i], occupant[i + 1] = bottom, top
    return out


def convert(enc: EncodedBraid, target: str) -> EncodedBraid:
    """Matrix-product conversions EP2->EP1, EP1->EP2 and ES1->ES2 (signed braids)."""
    target = target.upper()
    if enc.flat:
        raise EncodingError("matrix conversions hold for signed braids only")
    if enc.encoding == target:
        return enc
    pair = (enc.encoding, target)
    if pair == ("EP2", "EP1"):
        mat = EP1_FROM_EP2
    elif pair == ("EP1", "EP2"):
        mat = EP2_FROM_EP1
    elif pair == ("ES1", "ES2"):
        mat = ES2_FROM_ES1
    else:
        raise EncodingError(f"no matrix conversion from {enc.encoding} to {target}")
    if enc.rows != mat.shape[1]:
        raise EncodingError(f"{enc.encoding} matrix has {enc.rows} rows, conversion needs {mat.shape[1]}")
    return EncodedBraid(target, False, mat @ enc.matrix.astype(np.int64))


def decode_ep1(enc: EncodedBraid) -> Word:
    """Inverse of ``encode(., "EP1")``; returns a FlatWord for flat matrices."""
    if enc.encoding != "EP1":
        raise EncodingError(f"expected EP1, got {enc.encoding}")
    m = enc.matrix
    letters = []
    for j in range(m.shape[1]):
        nz = np.flatnonzero(m[:, j])
        if len(nz) != 1:
            raise EncodingError(f"column {j + 1} has {len(nz)} nonzero entries")
        v = int(m[nz[0], j])
        if enc.flat and v != 1 or v not in (1, -1):
            raise EncodingError(f"column {j + 1} has invalid entry {v}")
        letters.append(int(nz[0]) + 1 if v > 0 else -(int(nz[0]) + 1))
    strands = m.shape[0] + 1
    if enc.flat:
        return FlatWord(strands, tuple(letters))
    return BraidWord(strands, tuple(letters))


def decode_es2(enc: EncodedBraid) -> Word:
    """Recover the word behind an ES2 matrix, or raise if it is not realizable."""
    if enc.encoding != "ES2":
        raise EncodingError(f"expected ES2, got {enc.encoding}")
    m = enc.matrix
    n = m.shape[0]
    position = {s: s for s in range(1, n + 1)}
    occupant = list(range(1, n + 1))
    letters = []
    for j in range(m.shape[1]):
        col = m[:, j]
        nz = np.flatnonzero(col)
        if len(nz) != 2:
            raise EncodingError(f"column {j + 1} must have exactly two nonzero entries")
        a, b = int(nz[0]) + 1, int(nz[1]) + 1
        va, vb = int(col[a - 1]), int(col[b - 1])
        if enc.flat:
            if (va, vb) != (1, 1):
                raise EncodingError(f"flat column {j + 1} must hold two 1s")
        elif {va, vb} != {1, -1}:
            raise EncodingError(f"column {j + 1} must hold one 1 and one -1")
        pa, pb = position[a], position[b]
        if abs(pa - pb) != 1:
            raise EncodingError(f"column {j + 1}: strands {a} and {b} are not adjacent")
        i = min(pa, pb)
        if enc.flat:
            letters.append(i)
        else:
            over = a if va == 1 else b
            letters.append(i if position[over] == i else -i)
        top, bottom = occupant[i - 1], occupant[i]
        occupant[i - 1], occupant[i] = bottom, top
        position[top], position[bottom] = i + 1, i
    if enc.flat:
        return FlatWord(n, tuple(letters))
    return BraidWord(n, tuple(letters))


def permutation_of(word: Word) -> tuple[int, ...]:
    """Strand occupying each final position (1-based labels)."""
    occupant = list(range(1, word.strands + 1))
    for g in _signed_letters(word):
        i = abs(g) - 1
        occupant[i], occupant[i + 1] = occupant[i + 1], occupant[i]
    return tuple(occupant)


def flat_projection(word: BraidWord) -> FlatWord:
    return FlatWord(word.strands, tuple(abs(g) for g in word.letters))


# -- text forms ---------------------------------------------------------------

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def parse_word(text: str, strands: int = 3) -> BraidWord:
    """Parse ``abAB`` style (a=sigma_1, A=its inverse) or ``1,-2,1`` text."""
    text = text.strip()
    if not text:
        return BraidWord(strands, ())
    if re.fullmatch(r"[+-]?\d+(\s*,\s*[+-]?\d+)*", text):
        return BraidWord(strands, tuple(int(t) for t in text.split(",")))
    letters = []
    for ch in text:
        if ch.isspace():
            continue
        idx = _LETTERS.find(ch.lower())
        if idx < 0:
            raise ValueError(f"unexpected character {ch!r} in braid word")
        letters.append(idx + 1 if ch.islower() else -(idx + 1))
    return BraidWord(strands, tuple(letters))


def parse_flat(text: str, strands: int = 3) -> FlatWord:
    """Parse ``1212``, ``1,2,1,2`` or lowercase-letter flat words."""
    text = text.strip()
    if not text:
        return FlatWord(strands, ())
    if "," in text:
        return FlatWord(strands, tuple(int(t) for t in text.split(",")))
    out = []
    for ch in text:
        if ch.isspace():
            continue
        if ch.isdigit():
            out.append(int(ch))
        elif ch in _LETTERS:
            out.append(_LETTERS.index(ch) + 1)
        else:
            raise ValueError(f"unexpected character {ch!r} in flat word")
    return FlatWord(strands, tuple(out))


def format_word(word: Word) -> str:
    if isinstance(word, FlatWord):
        if word.strands <= 10:
            return "".join(str(p) for p in word.positions)
        return ",".join(str(p) for p in word.positions)
    if word.strands <= len(_LETTERS) + 1:
        return "".join(
            _LETTERS[abs(g) - 1] if g > 0 else _LETTERS[abs(g) - 1].upper() for g in word.letters
        )
    return ",".join(str(g) for g in word.letters)


def format_matrix(matrix: Sequence[Sequence[int]] | np.ndarray) -> str:
    m = np.asarray(matrix)
    if m.size == 0:
        return ""
    return "\n".join(" ".join(str(int(v)) for v in row) for row in m)


def all_words(k: int, strands: int = 3) -> Iterable[BraidWord]:
    """Every braid word of length k, in lexicographic order of the signed alphabet."""
    from itertools import product

    alphabet = [g for i in range(1, strands) for g in (i, -i)]
    for letters in product(alphabet, repeat=k):
        yield BraidWord(strands, letters)


def all_flat_words(k: int, strands: int = 3) -> Iterable[FlatWord]:
    from itertools import product

    for positions in product(range(1, strands), repeat=k):
        yield FlatWord(strands, positions)
