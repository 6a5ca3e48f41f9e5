"""Staged triviality checking: cheap necessary conditions in front of the exact solver.

Every stage but the last is a filter that can only reject.  A word that
passes all filters is decided by AUT, so all strategies return the same
verdict and differ only in how much work they do.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import aut
from .core import BraidWord
from .invariants import ep1_sum, es1_sums, es2_sums

CEP, CES2, CES1, AUT = "CEP", "CES2", "CES1", "AUT"
STAGES = (CEP, CES2, CES1, AUT)

PRESETS = {
    "aut": (AUT,),
    "cep-aut": (CEP, AUT),
    "ces1-aut": (CES1, AUT),
    "ces2-cep-aut": (CES2, CEP, AUT),
    "cep-ces2-aut": (CEP, CES2, AUT),
}

BENCH_HEADER = [
    "length", "strategy", "n", "pass_cep", "pass_ces2", "aut_checked", "trivial",
    "t_cep_s", "t_ces2_s", "t_aut_s", "t_total_s", "pass_ces1", "t_ces1_s",
]
HIST_HEADER = ["bin_low_s", "bin_high_s", "count_aut_only", "count_pipeline"]
HIST_BINS = np.logspace(-7, -1, 61)


@dataclass(frozen=True)
class Strategy:
    stages: tuple[str, ...]

    def __post_init__(self):
        stages = tuple(s.upper() for s in self.stages)
        object.__setattr__(self, "stages", stages)
        if not stages or stages[-1] != AUT:
            raise ValueError("a strategy must end with AUT")
        if len(set(stages)) != len(stages) or any(s not in STAGES for s in stages):
            raise ValueError(f"invalid stage list {stages}")

    @classmethod
    def parse(cls, name: str) -> Strategy:
        key = name.lower()
        if key in PRESETS:
            return cls(PRESETS[key])
        return cls(tuple(key.upper().split("-")))

    @property
    def name(self) -> str:
        return "-".join(self.stages).lower()


@dataclass(frozen=True)
class Verdict:
    trivial: bool
    rejected_by: Optional[str]
    stage_times: dict
    total_time: float


def _cep(word: BraidWord) -> bool:
    return ep1_sum(word) == 0


def _ces2(word: BraidWord) -> bool:
    return not any(es2_sums(word))


def _ces1(word: BraidWord) -> bool:
    return not any(es1_sums(word))


_STAGE_FN = {CEP: _cep, CES2: _ces2, CES1: _ces1, AUT: aut.is_trivial}


def check(word: BraidWord, strategy: Strategy | str = "cep-ces2-aut") -> Verdict:
    if isinstance(strategy, str):
        strategy = Strategy.parse(strategy)
    if word.strands != 3 and any(s in (CES2, CES1) for s in strategy.stages):
        raise ValueError("CES stages need 3-strand words")
    clock = time.perf_counter
    times = {}
    t0 = clock()
    for stage in strategy.stages:
        s = clock()
        ok = _STAGE_FN[stage](word)
        times[stage] = clock() - s
        if not ok:
            return Verdict(False, stage, times, clock() - t0)
    return Verdict(True, None, times, clock() - t0)


@dataclass
class PipelineStats:
    stages: tuple[str, ...]
    n_checked: int = 0
    reached: dict = field(default_factory=dict)
    passed: dict = field(default_factory=dict)
    stage_time: dict = field(default_factory=dict)
    trivial: int = 0
    total_time: float = 0.0
    per_braid_times: list = field(default_factory=list)

    def __post_init__(self):
        for s in self.stages:
            self.reached.setdefault(s, 0)
            self.passed.setdefault(s, 0)
            self.stage_time.setdefault(s, 0.0)

    def add(self, v: Verdict, keep_times: bool = False) -> None:
        self.n_checked += 1
        for s, t in v.stage_times.items():
            self.reached[s] += 1
            self.stage_time[s] += t
            if s != v.rejected_by:
                self.passed[s] += 1
        self.trivial += v.trivial
        self.total_time += v.total_time
        if keep_times:
            self.per_braid_times.append(v.total_time)

    def merge(self, other: PipelineStats) -> PipelineStats:
        if other.stages != self.stages:
            raise ValueError("cannot merge stats of different strategies")
        out = PipelineStats(self.stages)
        out.n_checked = self.n_checked + other.n_checked
        for s in self.stages:
            out.reached[s] = self.reached[s] + other.reached[s]
            out.passed[s] = self.passed[s] + other.passed[s]
            out.stage_time[s] = self.stage_time[s] + other.stage_time[s]
        out.trivial = self.trivial + other.trivial
        out.total_time = self.total_time + other.total_time
        out.per_braid_times = self.per_braid_times + other.per_braid_times
        return out


def _run_chunk(args) -> PipelineStats:
    words, stages, keep_times = args
    strategy = Strategy(stages)
    stats = PipelineStats(strategy.stages)
    for w in words:
        stats.add(check(w, strategy), keep_times)
    return stats


def run_batch(
    words: Iterable[BraidWord],
    strategy: Strategy | str = "cep-ces2-aut",
    keep_times: bool = False,
    threads: int = 1,
) -> PipelineStats:
    """Check a stream of words, aggregating stage counters.

    With ``threads > 1`` the stream is materialised and sharded over worker
    processes; counts are identical to the single-worker run.
    """
    if isinstance(strategy, str):
        strategy = Strategy.parse(strategy)
    if threads <= 1:
        return _run_chunk((words, strategy.stages, keep_times))
    words = list(words)
    size = max(1, math.ceil(len(words) / threads))
    chunks = [(words[i : i + size], strategy.stages, keep_times) for i in range(0, len(words), size)]
    stats = PipelineStats(strategy.stages)
    with ProcessPoolExecutor(threads) as pool:
        for part in pool.map(_run_chunk, chunks):
            stats = stats.merge(part)
    return stats


@dataclass
class BenchmarkReport:
    rows: list  # list of (length, strategy name, PipelineStats)

    def stats(self, length: int, strategy: str) -> PipelineStats:
        for n, s, st in self.rows:
            if n == length and s == Strategy.parse(strategy).name:
                return st
        raise KeyError((length, strategy))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(BENCH_HEADER)
        for length, name, st in self.rows:
            def cnt(stage):
                return st.passed[stage] if stage in st.stages else ""

            def tm(stage):
                return f"{st.stage_time[stage]:.6f}" if stage in st.stages else ""

            w.writerow([
                length, name, st.n_checked, cnt(CEP), cnt(CES2), st.reached[AUT], st.trivial,
                tm(CEP), tm(CES2), tm(AUT), f"{st.total_time:.6f}", cnt(CES1), tm(CES1),
            ])
        return buf.getvalue()

    def histogram(self, length: int, baseline: str = "aut", pipeline: str = "cep-ces2-aut") -> list:
        """Per-braid time counts in 60 log-spaced bins over [1e-7, 1e-1] seconds."""
        a = np.histogram(np.clip(self.stats(length, baseline).per_braid_times, 1e-7, 1e-1), HIST_BINS)[0]
        b = np.histogram(np.clip(self.stats(length, pipeline).per_braid_times, 1e-7, 1e-1), HIST_BINS)[0]
        return [(HIST_BINS[i], HIST_BINS[i + 1], int(a[i]), int(b[i])) for i in range(len(a))]

    def histogram_csv(self, length: int, baseline: str = "aut", pipeline: str = "cep-ces2-aut") -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(HIST_HEADER)
        for lo, hi, a, b in self.histogram(length, baseline, pipeline):
            w.writerow([f"{lo:.6e}", f"{hi:.6e}", a, b])
        return buf.getvalue()


def benchmark(
    lengths: Sequence[int],
    count: int,
    strategies: Sequence[str],
    seed: int = 0,
    warmup: int = 100,
) -> BenchmarkReport:
    """Time each strategy on the same random braids for every length.

    Runs single-threaded so per-stage timings are comparable.
    """
    from .datagen import random_braids

    report = BenchmarkReport([])
    if count < 1:
        return report
    parsed = [Strategy.parse(s) for s in strategies]
    rng = np.random.default_rng(seed)
    for length in lengths:
        words = random_braids(count, length, 3, rng)
        for strategy in parsed:
            for w in words[:warmup]:
                check(w, strategy)
            stats = run_batch(words, strategy, keep_times=True)
            report.rows.append((length, strategy.name, stats))
    return report
