"""Random braids, balanced labelled datasets and CSV/ARFF export."""

from __future__ import annotations

import csv
import io
import os
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from . import pipeline
from .core import BraidWord, FlatWord, encode, format_word, parse_flat, parse_word, permutation_of
from .invariants import check_ces, ep1_sum, flat_invariant

TRIVIAL, NONTRIVIAL = "trivial", "nontrivial"
LABELS = (TRIVIAL, NONTRIVIAL)
_BLOCK = 4096


class UnreachableClassError(ValueError):
    """The requested class cannot occur for this strand count and length."""


def _rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _alphabet(strands: int) -> np.ndarray:
    # sigma_1, sigma_1^-1, sigma_2, sigma_2^-1, ...
    return np.array([g for i in range(1, strands) for g in (i, -i)], dtype=np.int64)


def random_braid(k: int, strands: int = 3, rng=None) -> BraidWord:
    """k letters drawn i.i.d. uniformly from the 2(n-1) signed generators."""
    rng = _rng(rng)
    idx = rng.integers(0, 2 * (strands - 1), size=k)
    return BraidWord(strands, tuple(_alphabet(strands)[idx].tolist()))


def random_flat(k: int, strands: int = 3, rng=None) -> FlatWord:
    rng = _rng(rng)
    return FlatWord(strands, tuple(rng.integers(1, strands, size=k).tolist()))


def random_braids(count: int, k: int, strands: int = 3, rng=None) -> list[BraidWord]:
    rng = _rng(rng)
    rows = _alphabet(strands)[rng.integers(0, 2 * (strands - 1), size=(count, k))]
    return [BraidWord(strands, tuple(r)) for r in rows.tolist()]


def braid_stream(k: int, strands: int = 3, rng=None) -> Iterator[BraidWord]:
    """Endless stream of random braids, drawn in blocks for speed."""
    rng = _rng(rng)
    while True:
        yield from random_braids(_BLOCK, k, strands, rng)


def flat_stream(k: int, strands: int = 3, rng=None) -> Iterator[FlatWord]:
    rng = _rng(rng)
    while True:
        for r in rng.integers(1, strands, size=(_BLOCK, k)).tolist():
            yield FlatWord(strands, tuple(r))


@dataclass(frozen=True)
class DatasetSpec:
    strands: int = 3
    length: int = 12
    flat: bool = False
    encoding: str = "ES2"
    class_mix: str = "balanced"  # balanced | trivial-only | any
    count: int = 2000
    seed: int = 0
    condition: Optional[str] = None  # keep only words satisfying CEP/CES2/CES1

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be at least 1")
        if self.class_mix not in ("balanced", "trivial-only", "any"):
            raise ValueError(f"unknown class mix {self.class_mix!r}")
        if self.class_mix == "balanced" and self.count % 2:
            raise ValueError("a balanced dataset needs an even count")
        if self.strands not in (2, 3):
            raise ValueError("datasets are generated for 2 or 3 strands")


@dataclass(frozen=True, eq=False)
class DatasetRecord:
    word: BraidWord | FlatWord
    matrix: np.ndarray
    label: str

    def features(self) -> list[int]:
        return [int(v) for v in self.matrix.ravel()]

    def __eq__(self, other):
        if not isinstance(other, DatasetRecord):
            return NotImplemented
        return (
            self.word == other.word
            and self.label == other.label
            and self.matrix.shape == other.matrix.shape
            and bool(np.array_equal(self.matrix, other.matrix))
        )


def label_of(word: BraidWord | FlatWord) -> str:
    if isinstance(word, FlatWord):
        trivial = permutation_of(word) == tuple(range(1, word.strands + 1))
    else:
        trivial = pipeline.check(word, "cep-ces2-aut" if word.strands == 3 else "cep-aut").trivial
    return TRIVIAL if trivial else NONTRIVIAL


def satisfies(word: BraidWord | FlatWord, condition: str) -> bool:
    condition = condition.upper()
    if isinstance(word, FlatWord):
        if condition == "CES2" or condition == "CES1":
            return flat_invariant(word).value == (0, 0, 0)
        raise ValueError(f"{condition} is not defined for flat braids")
    if condition == "CEP":
        return ep1_sum(word) == 0
    return check_ces(word, condition)


def _reachable(spec: DatasetSpec) -> None:
    wants_trivial = spec.class_mix in ("balanced", "trivial-only")
    wants_nontrivial = spec.class_mix == "balanced"
    if wants_trivial and spec.length % 2:
        kind = "flat braids" if spec.flat else "braids"
        raise UnreachableClassError(f"no trivial {kind} of odd length {spec.length}")
    if wants_nontrivial and spec.length == 0:
        raise UnreachableClassError("every word of length 0 is trivial")
    if wants_nontrivial and spec.flat and spec.strands == 2 and spec.length % 2 == 0:
        raise UnreachableClassError("every 2-strand flat braid of even length is trivial")
    if wants_nontrivial and spec.condition and spec.flat:
        raise UnreachableClassError("flat braids satisfying CES are all trivial")


def build_dataset(spec: DatasetSpec) -> Iterator[DatasetRecord]:
    """Yield records by rejection sampling; balanced mode fills both classes equally."""
    _reachable(spec)
    rng = np.random.default_rng(spec.seed)
    stream = flat_stream(spec.length, spec.strands, rng) if spec.flat else braid_stream(spec.length, spec.strands, rng)
    if spec.class_mix == "balanced":
        quota = {TRIVIAL: spec.count // 2, NONTRIVIAL: spec.count // 2}
    elif spec.class_mix == "trivial-only":
        quota = {TRIVIAL: spec.count, NONTRIVIAL: 0}
    else:
        quota = None
    produced = 0
    for word in stream:
        if produced == spec.count:
            return
        if spec.condition and not satisfies(word, spec.condition):
            continue
        # a word failing CEP is nontrivial; skip the full check when that class is full
        if quota is not None and quota[NONTRIVIAL] == 0 and not spec.flat and ep1_sum(word) != 0:
            continue
        label = label_of(word)
        if quota is not None:
            if quota[label] == 0:
                continue
            quota[label] -= 1
        produced += 1
        yield DatasetRecord(word, encode(word, spec.encoding).matrix, label)


@dataclass
class ExplorationStats:
    explored: int = 0
    cep_pass: int = 0
    ces_pass: int = 0
    aut_trivial: int = 0
    duplicates: int = 0


def distinct_trivial_dataset(
    k: int, target_count: int, strategy: str = "cep-ces2-aut", seed: int = 0
) -> tuple[list[BraidWord], ExplorationStats]:
    """Draw random braids until ``target_count`` distinct (as words) trivial ones are found."""
    if k % 2:
        raise ValueError("trivial braids have even length")
    if target_count < 1:
        raise ValueError("target_count must be at least 1")
    strat = pipeline.Strategy.parse(strategy)
    stats = ExplorationStats()
    found: dict[BraidWord, None] = {}
    for word in braid_stream(k, 3, np.random.default_rng(seed)):
        stats.explored += 1
        v = pipeline.check(word, strat)
        passed = [s for s in v.stage_times if s != v.rejected_by]
        if pipeline.CEP in passed:
            stats.cep_pass += 1
        if v.stage_times.get(pipeline.AUT) is not None:
            stats.ces_pass += 1
        if v.trivial:
            stats.aut_trivial += 1
            if word in found:
                stats.duplicates += 1
            else:
                found[word] = None
                if len(found) == target_count:
                    break
    return list(found), stats


# -- export ------------------------------------------------------------------


def column_names(rows: int, k: int) -> list[str]:
    return [f"m{r}_{c}" for r in range(1, rows + 1) for c in range(1, k + 1)]


def _shape(records: Sequence[DatasetRecord]) -> tuple[int, int]:
    shapes = {r.matrix.shape for r in records}
    if len(shapes) != 1:
        raise ValueError("records must share one matrix shape")
    return shapes.pop()


def to_csv(records: Sequence[DatasetRecord]) -> str:
    rows, k = _shape(records)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["word", *column_names(rows, k), "label"])
    for r in records:
        w.writerow([format_word(r.word), *r.features(), r.label])
    return buf.getvalue()


def to_arff(records: Sequence[DatasetRecord], comment: Optional[str] = None) -> str:
    rows, k = _shape(records)
    lines = []
    if comment:
        lines += [f"% {ln}" for ln in comment.splitlines()]
    lines.append("@relation braids")
    lines.append("")
    lines += [f"@attribute {name} numeric" for name in column_names(rows, k)]
    lines.append("@attribute label {trivial,nontrivial}")
    lines.append("")
    lines.append("@data")
    for r in records:
        lines.append(",".join([*(str(v) for v in r.features()), r.label]))
    return "\n".join(lines) + "\n"


def export(records: Iterable[DatasetRecord], fmt: str, path: str | os.PathLike, comment: Optional[str] = None) -> None:
    records = list(records)
    fmt = fmt.lower()
    if fmt == "csv":
        text = to_csv(records)
    elif fmt == "arff":
        text = to_arff(records, comment)
    else:
        raise ValueError(f"unknown export format {fmt!r}")
    with open(path, "w", newline="") as fh:
        fh.write(text)


def read_csv(path: str | os.PathLike, strands: int = 3, flat: bool = False) -> list[DatasetRecord]:
    """Load records written by :func:`to_csv`; the matrix shape comes from the header."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cells = header[1:-1]
        rows = max(int(re.fullmatch(r"m(\d+)_(\d+)", c).group(1)) for c in cells)
        k = len(cells) // rows
        out = []
        for line in reader:
            word = parse_flat(line[0], strands) if flat else parse_word(line[0], strands)
            m = np.array([int(v) for v in line[1:-1]], dtype=np.int8).reshape(rows, k)
            m.setflags(write=False)
            out.append(DatasetRecord(word, m, line[-1]))
    return out
