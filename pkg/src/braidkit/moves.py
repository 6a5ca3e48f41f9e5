"""Reidemeister moves R2/R3 on EP1 and ES2 matrices, and the flat-braid untangler."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import EncodedBraid, EncodingError, FlatWord, decode_es2, encode, permutation_of
from .invariants import flat_invariant, is_realizable_flat

R2_REMOVE = "R2_REMOVE"
R2_INSERT = "R2_INSERT"
R3 = "R3"
KINDS = (R2_REMOVE, R2_INSERT, R3)


class MoveError(ValueError):
    """A move whose preconditions do not hold."""


@dataclass(frozen=True)
class Move:
    kind: str
    position: int  # 1-based index of the leftmost affected column
    payload: Optional[tuple[tuple[int, ...], tuple[int, ...]]] = None

    def to_json(self) -> dict:
        d = {"kind": self.kind, "pos": self.position}
        if self.payload is not None:
            d["payload"] = [list(c) for c in self.payload]
        return d

    @classmethod
    def from_json(cls, d: dict) -> Move:
        payload = d.get("payload")
        if payload is not None:
            payload = tuple(tuple(int(v) for v in c) for c in payload)
        return cls(d["kind"], int(d["pos"]), payload)


@dataclass(frozen=True)
class MoveSequence:
    start: EncodedBraid
    moves: tuple[Move, ...]
    end: EncodedBraid

    def to_jsonl(self) -> str:
        header = {
            "encoding": self.start.encoding,
            "flat": self.start.flat,
            "start": _matrix_json(self.start),
            "end": _matrix_json(self.end),
        }
        lines = [json.dumps(header, separators=(",", ":"))]
        lines += [json.dumps(m.to_json(), separators=(",", ":")) for m in self.moves]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> MoveSequence:
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = json.loads(lines[0])
        enc, flat = header["encoding"], bool(header["flat"])
        start = EncodedBraid(enc, flat, _matrix_from_json(header["start"]))
        end = EncodedBraid(enc, flat, _matrix_from_json(header["end"]))
        return cls(start, tuple(Move.from_json(json.loads(ln)) for ln in lines[1:]), end)


@dataclass(frozen=True)
class NontrivialReport:
    word: FlatWord
    invariant: tuple[int, int, int]
    canonical: FlatWord
    permutation: tuple[int, ...]


def _matrix_json(enc: EncodedBraid) -> list[list[int]]:
    return enc.matrix.tolist()


def _matrix_from_json(rows: list[list[int]]) -> np.ndarray:
    if rows and not rows[0]:
        return np.zeros((len(rows), 0), dtype=np.int8)
    return np.array(rows, dtype=np.int8)


def _column_support(col: np.ndarray) -> tuple[int, ...]:
    return tuple(int(i) for i in np.flatnonzero(col))


# -- EP1 ---------------------------------------------------------------------


def _ep1_letter(col: np.ndarray, flat: bool) -> tuple[int, int]:
    """(row, value) of a single-nonzero EP1 column."""
    nz = np.flatnonzero(col)
    if len(nz) != 1:
        raise MoveError("EP1 column must have exactly one nonzero entry")
    v = int(col[nz[0]])
    if v not in ((1,) if flat else (1, -1)):
        raise MoveError(f"invalid EP1 entry {v}")
    return int(nz[0]), v


def _ep1_cancelling(a: np.ndarray, b: np.ndarray, flat: bool) -> bool:
    ra, va = _ep1_letter(a, flat)
    rb, vb = _ep1_letter(b, flat)
    return ra == rb and (va == vb if flat else va == -vb)


def _ep1_r3(m: np.ndarray, p: int, flat: bool) -> np.ndarray:
    (r1, x), (r2, y), (r3, z) = (_ep1_letter(m[:, p + t], flat) for t in range(3))
    if r1 != r3 or abs(r1 - r2) != 1:
        raise MoveError("columns do not form an R3 pattern")
    # sigma_i^x sigma_j^y sigma_i^z == sigma_j^z sigma_i^y sigma_j^x fails exactly
    # for the two cyclic patterns x == z != y
    if not flat and x == z and x != y:
        raise MoveError(f"R3 not allowed for signs x={x}, y={y}, z={z}")
    out = m.copy()
    out[:, p : p + 3] = 0
    out[r2, p] = z
    out[r1, p + 1] = y
    out[r2, p + 2] = x
    return out


# -- ES2 ---------------------------------------------------------------------


def _es2_column_ok(col: np.ndarray, flat: bool) -> bool:
    vals = sorted(int(v) for v in col if v != 0)
    return vals == ([1, 1] if flat else [-1, 1])


def _es2_r3(m: np.ndarray, p: int, flat: bool) -> np.ndarray:
    cols = [m[:, p + t] for t in range(3)]
    if not all(_es2_column_ok(c, flat) for c in cols):
        raise MoveError("malformed ES2 column")
    s1, s2, s3 = (frozenset(_column_support(c)) for c in cols)
    if len({s1, s2, s3}) != 3 or len(s1 | s2 | s3) != 3:
        raise MoveError("R3 needs three crossings of three distinct strand pairs")
    if not flat:
        (a,) = s1 & s2
        (b,) = s1 - {a}
        x = int(cols[0][a])
        y = -int(cols[1][a])
        z = int(cols[2][b])
        # rows (x, -y, 0), (-x, 0, z), (0, y, -z); all equal means a cyclic height order
        if x == y == z:
            raise MoveError(f"R3 not allowed for x=y=z={x}")
    out = m.copy()
    out[:, [p, p + 2]] = m[:, [p + 2, p]]
    return out


# -- dispatch ----------------------------------------------------------------


def apply_move(enc: EncodedBraid, move: Move) -> EncodedBraid:
    if enc.encoding not in ("EP1", "ES2"):
        raise MoveError(f"moves are implemented on EP1 and ES2, not {enc.encoding}")
    if move.kind not in KINDS:
        raise MoveError(f"unknown move kind {move.kind!r}")
    m = enc.matrix
    k = m.shape[1]
    p = move.position - 1
    flat = enc.flat

    if move.kind == R2_REMOVE:
        if not 0 <= p <= k - 2:
            raise MoveError(f"R2 position {move.position} out of range for k={k}")
        a, b = m[:, p], m[:, p + 1]
        if enc.encoding == "EP1":
            ok = _ep1_cancelling(a, b, flat)
        else:
            ok = _es2_column_ok(a, flat) and bool(np.array_equal(a, b))
        if not ok:
            raise MoveError(f"columns {p + 1},{p + 2} do not cancel")
        out = np.delete(m, [p, p + 1], axis=1)

    elif move.kind == R2_INSERT:
        if not 0 <= p <= k:
            raise MoveError(f"R2 insert position {move.position} out of range for k={k}")
        if move.payload is None or len(move.payload) != 2:
            raise MoveError("R2 insert needs a pair of columns")
        pair = np.array(move.payload, dtype=np.int8).T
        if pair.shape != (m.shape[0], 2):
            raise MoveError("payload columns have the wrong height")
        a, b = pair[:, 0], pair[:, 1]
        if enc.encoding == "EP1":
            ok = _ep1_cancelling(a, b, flat)
        else:
            ok = _es2_column_ok(a, flat) and bool(np.array_equal(a, b))
        if not ok:
            raise MoveError("payload is not a cancelling pair")
        out = np.concatenate([m[:, :p], pair, m[:, p:]], axis=1)

    else:
        if not 0 <= p <= k - 3:
            raise MoveError(f"R3 position {move.position} out of range for k={k}")
        out = _ep1_r3(m, p, flat) if enc.encoding == "EP1" else _es2_r3(m, p, flat)

    result = EncodedBraid(enc.encoding, flat, out)
    if enc.encoding == "ES2":
        try:
            decode_es2(result)
        except EncodingError as exc:
            raise MoveError(f"move leaves a non-realizable matrix: {exc}") from None
    return result


def applicable_moves(enc: EncodedBraid) -> list[Move]:
    """All R2 removals and R3 moves whose preconditions hold."""
    out = []
    for kind, span in ((R2_REMOVE, 2), (R3, 3)):
        for pos in range(1, enc.k - span + 2):
            mv = Move(kind, pos)
            try:
                apply_move(enc, mv)
            except MoveError:
                continue
            out.append(mv)
    return out


def certify(seq: MoveSequence) -> bool:
    """Replay a move sequence, checking every precondition and the final matrix."""
    cur = seq.start
    try:
        if cur.encoding == "ES2":
            decode_es2(cur)
        for mv in seq.moves:
            cur = apply_move(cur, mv)
            if cur.flat and cur.encoding == "ES2" and cur.rows == 3 and not is_realizable_flat(cur)[0]:
                return False
    except (MoveError, EncodingError):
        return False
    return cur == seq.end


def _closest_repeat(cols: Sequence[tuple[int, ...]]) -> Optional[tuple[int, int]]:
    """Smallest (i, j) with cols[i] == cols[j], no copy between, distinct columns between."""
    k = len(cols)
    for i in range(k):
        seen = set()
        for j in range(i + 1, k):
            if cols[j] == cols[i]:
                return i, j
            if cols[j] in seen:
                break
            seen.add(cols[j])
    return None


def untangle_flat(word: FlatWord) -> MoveSequence | NontrivialReport:
    """Reduce a trivial 3-strand flat braid to the empty braid with R3 shifts and R2 removals.

    Repeatedly picks the leftmost pair of equal ES2 columns with pairwise
    distinct columns between them, slides the left copy right two places at a
    time with R3 until the copies touch, then removes them with R2.
    """
    if word.strands != 3:
        raise ValueError("untangling is implemented for 3-strand flat braids")
    start = encode(word, "ES2")
    if permutation_of(word) != (1, 2, 3):
        inv = flat_invariant(word)
        return NontrivialReport(word, inv.value, inv.canonical, inv.permutation)
    cur = start
    moves: list[Move] = []
    while cur.k:
        cols = [tuple(int(v) for v in cur.matrix[:, j]) for j in range(cur.k)]
        found = _closest_repeat(cols)
        if found is None:
            raise AssertionError(f"trivial flat braid with no repeated column: {cols}")
        i, j = found
        while j - i > 1:
            mv = Move(R3, i + 1)
            cur = apply_move(cur, mv)
            moves.append(mv)
            i += 2
        mv = Move(R2_REMOVE, i + 1)
        cur = apply_move(cur, mv)
        moves.append(mv)
    return MoveSequence(start, tuple(moves), cur)


def replay(start: EncodedBraid, moves: Iterable[Move]) -> list[EncodedBraid]:
    """Every intermediate matrix, start included."""
    out = [start]
    for mv in moves:
        out.append(apply_move(out[-1], mv))
    return out
