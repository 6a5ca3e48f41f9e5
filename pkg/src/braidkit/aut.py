"""Braid word problem on 3 strands via Artin's action on the free group F(x1, x2, x3).

Free words are tuples of nonzero ints: ``g`` stands for ``x_g`` and ``-g`` for
its inverse.  An automorphism is the tuple of the images of ``x1, x2, x3``.

``compose(f, g)`` is the map ``f o g`` (substitute ``f``'s images into ``g``'s),
so ``word_automorphism(u + v) == compose(word_automorphism(u), word_automorphism(v))``.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Sequence

from .core import BraidWord

FreeWord = tuple[int, ...]
Automorphism = tuple[FreeWord, FreeWord, FreeWord]

IDENTITY: Automorphism = ((1,), (2,), (3,))
DEFAULT_MAX_LENGTH = 10**7


class ImageTooLongError(RuntimeError):
    """An automorphism image grew past the configured ceiling."""


def reduce(word: Iterable[int]) -> FreeWord:
    """Free reduction by a single stack pass."""
    out: list[int] = []
    for letter in word:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def inverse(word: Sequence[int]) -> FreeWord:
    return tuple(-g for g in reversed(word))


def _append_reduced(stack: list[int], piece: Sequence[int]) -> None:
    # both stack and piece are reduced; only the junction can cancel
    i = 0
    n = len(piece)
    while i < n and stack and stack[-1] == -piece[i]:
        stack.pop()
        i += 1
    stack.extend(piece[i:] if i else piece)


def substitute(f: Automorphism, word: Sequence[int], max_length: int = DEFAULT_MAX_LENGTH) -> FreeWord:
    """Apply ``f`` to a free word, reducing as it goes."""
    inv = [inverse(img) for img in f]
    stack: list[int] = []
    for g in word:
        _append_reduced(stack, f[g - 1] if g > 0 else inv[-g - 1])
        if len(stack) > max_length:
            raise ImageTooLongError(f"image length exceeded {max_length}")
    return tuple(stack)


def compose(f: Automorphism, g: Automorphism, max_length: int = DEFAULT_MAX_LENGTH) -> Automorphism:
    return tuple(substitute(f, img, max_length) for img in g)  # type: ignore[return-value]


def _sigma(i: int) -> Automorphism:
    # x_i -> x_i x_{i+1} x_i^-1, x_{i+1} -> x_i
    images = [(1,), (2,), (3,)]
    images[i - 1] = (i, i + 1, -i)
    images[i] = (i,)
    return tuple(images)  # type: ignore[return-value]


def _sigma_inv(i: int) -> Automorphism:
    # x_i -> x_{i+1}, x_{i+1} -> x_{i+1}^-1 x_i x_{i+1}
    images = [(1,), (2,), (3,)]
    images[i - 1] = (i + 1,)
    images[i] = (-(i + 1), i, i + 1)
    return tuple(images)  # type: ignore[return-value]


GENERATORS: dict[int, Automorphism] = {1: _sigma(1), -1: _sigma_inv(1), 2: _sigma(2), -2: _sigma_inv(2)}


def generator_automorphism(g: int) -> Automorphism:
    """Artin automorphism of the signed generator ``g`` (``+i`` or ``-i``, i in {1, 2})."""
    try:
        return GENERATORS[g]
    except KeyError:
        raise ValueError(f"generator {g} is not a 3-strand generator") from None


def _letters(word: BraidWord | Sequence[int]) -> Sequence[int]:
    if isinstance(word, BraidWord):
        if word.strands != 3:
            raise ValueError("the automorphism solver handles 3 strands")
        return word.letters
    return word


def word_automorphism(word: BraidWord | Sequence[int], max_length: int = DEFAULT_MAX_LENGTH) -> Automorphism:
    """Automorphism of a braid word by recursive bisection.

    Splitting in the middle lets both halves reduce their images before they
    are multiplied, which keeps intermediate words short in practice.
    """
    letters = _letters(word)

    def rec(lo: int, hi: int) -> Automorphism:
        if hi - lo == 0:
            return IDENTITY
        if hi - lo == 1:
            return generator_automorphism(letters[lo])
        mid = (lo + hi) // 2
        return compose(rec(lo, mid), rec(mid, hi), max_length)

    return rec(0, len(letters))


def word_automorphism_sequential(word: BraidWord | Sequence[int], max_length: int = DEFAULT_MAX_LENGTH) -> Automorphism:
    acc = IDENTITY
    for g in _letters(word):
        acc = compose(acc, generator_automorphism(g), max_length)
    return acc


def is_trivial(word: BraidWord, max_length: int = DEFAULT_MAX_LENGTH) -> bool:
    if word.strands == 2:
        return sum(1 if g > 0 else -1 for g in word.letters) == 0
    if word.strands != 3:
        raise ValueError("triviality is decided for 2 or 3 strands")
    return word_automorphism(word, max_length) == IDENTITY


def are_equal(u: BraidWord, v: BraidWord) -> bool:
    if u.strands != v.strands:
        raise ValueError("words live on different strand counts")
    return is_trivial(u + v.inverse())


def automorphism_counts(length: int) -> Counter:
    """Number of words of the given length inducing each automorphism."""
    level: Counter = Counter({IDENTITY: 1})
    for _ in range(length):
        nxt: Counter = Counter()
        for f, c in level.items():
            for g in (1, -1, 2, -2):
                nxt[compose(f, GENERATORS[g])] += c
        level = nxt
    return level


def count_trivial_words(k: int) -> int:
    """Number of length-k words over {s1, s1^-1, s2, s2^-1} equal to the identity.

    A word ``uv`` with ``|u| = k//2`` is trivial iff ``phi(u) == phi(v^-1)``, and
    inversion permutes the words of a fixed length, so the count is
    ``sum_f N_a(f) * N_b(f)`` over automorphisms ``f`` reached by length-a and
    length-b words.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    a = k // 2
    left = automorphism_counts(a)
    if k - a == a:
        return sum(c * c for c in left.values())
    right = automorphism_counts(k - a)
    return sum(c * right.get(f, 0) for f, c in left.items())
