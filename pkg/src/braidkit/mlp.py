"""Single-hidden-layer sigmoid perceptron trained by per-example backpropagation with momentum.

Defaults follow the classic WEKA MultilayerPerceptron settings: learning
rate 0.3, momentum 0.2, 500 epochs, no validation set, seed 0, patience 20,
and ``H = ceil((attributes + classes) / 2)`` hidden units.  Outputs are two
sigmoid nodes (trivial, nontrivial) trained on squared error against one-hot
targets.  ``H = 0`` connects inputs straight to the outputs.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numba
import numpy as np

from .datagen import LABELS, NONTRIVIAL, TRIVIAL, DatasetRecord, satisfies

INIT_RANGE = 0.05


@dataclass(frozen=True)
class MLPConfig:
    hidden: Optional[int] = None  # None -> (attributes + 2) / 2, rounded up
    learning_rate: float = 0.3
    momentum: float = 0.2
    epochs: int = 500
    validation_pct: float = 0.0
    seed: int = 0
    error_patience: int = 20

    def hidden_units(self, n_inputs: int) -> int:
        if self.hidden is None:
            return math.ceil((n_inputs + len(LABELS)) / 2)
        if self.hidden < 0:
            raise ValueError("hidden must be >= 0")
        return self.hidden


@dataclass
class MLPModel:
    """Weights of a trained network; ``w1``/``b1`` are empty when there is no hidden layer."""

    w1: np.ndarray  # (H, D)
    b1: np.ndarray  # (H,)
    w2: np.ndarray  # (2, H) or (2, D) when H == 0
    b2: np.ndarray  # (2,)
    config: MLPConfig = field(default_factory=MLPConfig)
    epochs_run: int = 0

    @property
    def hidden(self) -> int:
        return self.w1.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.w1.shape[1] if self.hidden else self.w2.shape[1]

    def outputs(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        h = _sigmoid(X @ self.w1.T + self.b1) if self.hidden else X
        return _sigmoid(h @ self.w2.T + self.b2)

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Class index per row: 0 trivial, 1 nontrivial (ties go to trivial)."""
        o = self.outputs(X)
        return (o[:, 1] > o[:, 0]).astype(np.int64)

    def to_json(self) -> dict:
        return {
            "config": asdict(self.config),
            "hidden": self.hidden,
            "n_inputs": self.n_inputs,
            "classes": list(LABELS),
            "epochs_run": self.epochs_run,
            "w1": self.w1.tolist(),
            "b1": self.b1.tolist(),
            "w2": self.w2.tolist(),
            "b2": self.b2.tolist(),
        }

    @classmethod
    def from_json(cls, d: dict) -> MLPModel:
        n_in = d["n_inputs"]
        w1 = np.array(d["w1"], dtype=np.float64).reshape(d["hidden"], n_in)
        return cls(
            w1,
            np.array(d["b1"], dtype=np.float64),
            np.array(d["w2"], dtype=np.float64),
            np.array(d["b2"], dtype=np.float64),
            MLPConfig(**d["config"]),
            d.get("epochs_run", 0),
        )


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def init_model(n_inputs: int, config: MLPConfig, rng: np.random.Generator) -> MLPModel:
    h = config.hidden_units(n_inputs)
    u = lambda *shape: rng.uniform(-INIT_RANGE, INIT_RANGE, size=shape)  # noqa: E731
    if h:
        return MLPModel(u(h, n_inputs), u(h), u(2, h), u(2), config)
    return MLPModel(np.zeros((0, n_inputs)), np.zeros(0), u(2, n_inputs), u(2), config)


# -- reference (numpy) gradient and update; the numba kernel must agree --------


def loss_and_grads(model: MLPModel, x: np.ndarray, t: np.ndarray):
    """Squared error 0.5*sum((o - t)^2) for one example and its gradients (w1, b1, w2, b2)."""
    x = np.asarray(x, dtype=np.float64)
    if model.hidden:
        h = _sigmoid(model.w1 @ x + model.b1)
    else:
        h = x
    o = _sigmoid(model.w2 @ h + model.b2)
    loss = 0.5 * float(np.sum((o - t) ** 2))
    d_out = (o - t) * o * (1 - o)
    g_w2 = np.outer(d_out, h)
    g_b2 = d_out
    if model.hidden:
        d_hid = (model.w2.T @ d_out) * h * (1 - h)
        g_w1 = np.outer(d_hid, x)
        g_b1 = d_hid
    else:
        g_w1 = np.zeros_like(model.w1)
        g_b1 = np.zeros_like(model.b1)
    return loss, (g_w1, g_b1, g_w2, g_b2)


def momentum_step(params, velocity, grads, lr: float, momentum: float):
    """One update: delta = -lr * grad + momentum * previous delta; w += delta."""
    new_v = tuple(-lr * g + momentum * v for g, v in zip(grads, velocity))
    new_p = tuple(p + d for p, d in zip(params, new_v))
    return new_p, new_v


# -- compiled training loop ---------------------------------------------------


@numba.njit(cache=True)
def _epoch(X, T, order, w1, b1, w2, b2, v1, vb1, v2, vb2, lr, mom):
    n_hidden = w1.shape[0]
    n_in = X.shape[1]
    hid = np.empty(n_hidden)
    d_hid = np.empty(n_hidden)
    out = np.empty(2)
    d_out = np.empty(2)
    sse = 0.0
    for idx in order:
        x = X[idx]
        if n_hidden > 0:
            for j in range(n_hidden):
                s = b1[j]
                for i in range(n_in):
                    s += w1[j, i] * x[i]
                hid[j] = 1.0 / (1.0 + math.exp(-s))
            for c in range(2):
                s = b2[c]
                for j in range(n_hidden):
                    s += w2[c, j] * hid[j]
                out[c] = 1.0 / (1.0 + math.exp(-s))
        else:
            for c in range(2):
                s = b2[c]
                for i in range(n_in):
                    s += w2[c, i] * x[i]
                out[c] = 1.0 / (1.0 + math.exp(-s))
        for c in range(2):
            e = out[c] - T[idx, c]
            sse += 0.5 * e * e
            d_out[c] = e * out[c] * (1.0 - out[c])
        if n_hidden > 0:
            for j in range(n_hidden):
                s = 0.0
                for c in range(2):
                    s += w2[c, j] * d_out[c]
                d_hid[j] = s * hid[j] * (1.0 - hid[j])
            for c in range(2):
                for j in range(n_hidden):
                    v2[c, j] = -lr * d_out[c] * hid[j] + mom * v2[c, j]
                    w2[c, j] += v2[c, j]
                vb2[c] = -lr * d_out[c] + mom * vb2[c]
                b2[c] += vb2[c]
            for j in range(n_hidden):
                for i in range(n_in):
                    v1[j, i] = -lr * d_hid[j] * x[i] + mom * v1[j, i]
                    w1[j, i] += v1[j, i]
                vb1[j] = -lr * d_hid[j] + mom * vb1[j]
                b1[j] += vb1[j]
        else:
            for c in range(2):
                for i in range(n_in):
                    v2[c, i] = -lr * d_out[c] * x[i] + mom * v2[c, i]
                    w2[c, i] += v2[c, i]
                vb2[c] = -lr * d_out[c] + mom * vb2[c]
                b2[c] += vb2[c]
    return sse


def _targets(y: np.ndarray) -> np.ndarray:
    T = np.zeros((len(y), 2))
    T[np.arange(len(y)), y] = 1.0
    return T


def _sse(model: MLPModel, X: np.ndarray, y: np.ndarray) -> float:
    return 0.5 * float(np.sum((model.outputs(X) - _targets(y)) ** 2))


def train_arrays(X: np.ndarray, y: np.ndarray, config: MLPConfig = MLPConfig()) -> MLPModel:
    """Train on features ``X`` (N, D) and class indices ``y`` (0 trivial, 1 nontrivial)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(X) == 0:
        raise ValueError("empty dataset")
    if len(np.unique(y)) < 2:
        raise ValueError("training data contains a single class")
    rng = np.random.default_rng(config.seed)
    model = init_model(X.shape[1], config, rng)

    idx = rng.permutation(len(X))
    n_val = int(round(len(X) * config.validation_pct / 100.0))
    val_idx, train_idx = idx[:n_val], idx[n_val:]
    Xt, Tt = X[train_idx], _targets(y[train_idx])
    w1, b1, w2, b2 = (a.copy() for a in (model.w1, model.b1, model.w2, model.b2))
    v1, vb1, v2, vb2 = (np.zeros_like(a) for a in (w1, b1, w2, b2))

    best_err = math.inf
    best = None
    worse = 0
    epochs_run = 0
    for _ in range(config.epochs):
        order = rng.permutation(len(Xt))
        _epoch(Xt, Tt, order, w1, b1, w2, b2, v1, vb1, v2, vb2, config.learning_rate, config.momentum)
        epochs_run += 1
        if not (np.all(np.isfinite(w2)) and np.all(np.isfinite(w1))):
            raise FloatingPointError("training diverged")
        if n_val:
            snap = MLPModel(w1, b1, w2, b2, config)
            err = _sse(snap, X[val_idx], y[val_idx])
            if err < best_err:
                best_err, worse = err, 0
                best = tuple(a.copy() for a in (w1, b1, w2, b2))
            else:
                worse += 1
                if worse >= config.error_patience:
                    break
    if best is not None:
        w1, b1, w2, b2 = best
    return MLPModel(w1, b1, w2, b2, config, epochs_run)


def records_to_arrays(records: Sequence[DatasetRecord]) -> tuple[np.ndarray, np.ndarray]:
    X = np.array([r.features() for r in records], dtype=np.float64)
    y = np.array([LABELS.index(r.label) for r in records], dtype=np.int64)
    return X, y


def train(records: Sequence[DatasetRecord], config: MLPConfig = MLPConfig()) -> MLPModel:
    X, y = records_to_arrays(records)
    return train_arrays(X, y, config)


# -- evaluation -------------------------------------------------------------


@dataclass
class EvalReport:
    precision: dict  # label -> precision, None where a class received no predictions
    weighted_precision: Optional[float]
    confusion: list  # rows actual, columns predicted, order (trivial, nontrivial)
    scheme: str = ""

    @property
    def undefined(self) -> bool:
        return self.weighted_precision is None

    def cell(self) -> str:
        """Table form: three decimals, or ``?`` when undefined."""
        return "?" if self.undefined else f"{self.weighted_precision:.3f}"

    def to_json(self) -> dict:
        return {
            "scheme": self.scheme,
            "precision_trivial": self.precision[TRIVIAL],
            "precision_nontrivial": self.precision[NONTRIVIAL],
            "weighted_precision": self.weighted_precision,
            "confusion": self.confusion,
        }


def precision_report(y_true: np.ndarray, y_pred: np.ndarray, scheme: str = "") -> EvalReport:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    conf = [[int(np.sum((y_true == a) & (y_pred == p))) for p in range(2)] for a in range(2)]
    precision = {}
    for c, label in enumerate(LABELS):
        predicted = conf[0][c] + conf[1][c]
        precision[label] = conf[c][c] / predicted if predicted else None
    n = len(y_true)
    if any(precision[label] is None for label in LABELS) or n == 0:
        weighted = None
    else:
        weighted = sum((conf[c][0] + conf[c][1]) / n * precision[label] for c, label in enumerate(LABELS))
    return EvalReport(precision, weighted, conf, scheme)


def evaluate(model: MLPModel, records: Sequence[DatasetRecord]) -> EvalReport:
    X, y = records_to_arrays(records)
    return precision_report(y, model.predict(X))


def split_evaluate(records: Sequence[DatasetRecord], fraction: float, config: MLPConfig = MLPConfig()):
    """Train on the first ceil(fraction * N) records after a seeded shuffle, test on the rest."""
    X, y = records_to_arrays(records)
    order = np.random.default_rng(config.seed).permutation(len(X))
    cut = math.ceil(fraction * len(X))
    tr, te = order[:cut], order[cut:]
    model = train_arrays(X[tr], y[tr], config)
    report = precision_report(y[te], model.predict(X[te]), f"split{round(fraction * 100)}")
    return model, report


def stratified_folds(y: np.ndarray, folds: int, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    parts: list[list[int]] = [[] for _ in range(folds)]
    for c in np.unique(y):
        idx = rng.permutation(np.flatnonzero(y == c))
        for f in range(folds):
            parts[f].extend(idx[f::folds].tolist())
    return [np.array(sorted(p), dtype=np.int64) for p in parts]


def cross_validate(records: Sequence[DatasetRecord], folds: int, config: MLPConfig = MLPConfig()) -> EvalReport:
    """Stratified k-fold; reports the mean of the per-fold weighted precisions."""
    X, y = records_to_arrays(records)
    parts = stratified_folds(y, folds, config.seed)
    reports = []
    for f in range(folds):
        test = parts[f]
        train_idx = np.concatenate([parts[g] for g in range(folds) if g != f])
        model = train_arrays(X[train_idx], y[train_idx], config)
        reports.append(precision_report(y[test], model.predict(X[test])))
    conf = np.sum([r.confusion for r in reports], axis=0).tolist()
    precision = {}
    for label in LABELS:
        vals = [r.precision[label] for r in reports]
        precision[label] = None if any(v is None for v in vals) else float(np.mean(vals))
    weighted = None if any(r.undefined for r in reports) else float(np.mean([r.weighted_precision for r in reports]))
    return EvalReport(precision, weighted, conf, f"fold{folds}")


SWEEP_HEADER = ["H", "split50", "split67", "split75", "fold2", "fold3", "fold4"]


def sweep(records: Sequence[DatasetRecord], hidden: Sequence[Optional[int]], config: MLPConfig = MLPConfig()) -> list[list[str]]:
    """Rows shaped like the learnability tables: H, three splits, three fold counts."""
    rows = []
    n_inputs = len(records[0].features())
    for h in hidden:
        cfg = MLPConfig(**{**asdict(config), "hidden": h})
        row = [str(h) if h is not None else f"a={cfg.hidden_units(n_inputs)}"]
        for frac in (0.50, 0.67, 0.75):
            row.append(split_evaluate(records, frac, cfg)[1].cell())
        for k in (2, 3, 4):
            row.append(cross_validate(records, k, cfg).cell())
        rows.append(row)
    return rows


# -- interpretation -----------------------------------------------------------


@dataclass(frozen=True)
class WeightPattern:
    signs: np.ndarray  # (units, rows, k) signs of the input weights
    row_scores: np.ndarray  # (units, rows) agreement with (-1)**column, best phase per row
    alternation_score: float  # mean of row_scores
    global_score: float  # one phase shared by all rows, mean over units
    uniform_score: float  # majority-sign agreement, mean over units

    def to_json(self) -> dict:
        return {
            "alternation_score": self.alternation_score,
            "global_score": self.global_score,
            "uniform_score": self.uniform_score,
            "row_scores": self.row_scores.tolist(),
            "signs": self.signs.tolist(),
        }


def _input_weights(model: MLPModel) -> np.ndarray:
    return model.w1 if model.hidden else model.w2


def extract_pattern(model: MLPModel, rows: int, k: int) -> WeightPattern:
    """Sign structure of the input weights laid out on the (rows, k) encoding matrix.

    Each row is compared with the template ``(-1)**column`` in whichever phase
    fits it better: an alternating-sum detector may weight every row with
    either sign.  ``global_score`` forces a single phase on all rows.  With no
    hidden layer the two output nodes' weights are read instead.
    """
    W = _input_weights(model)
    if W.shape[1] != rows * k:
        raise ValueError(f"model has {W.shape[1]} inputs, layout needs {rows * k}")
    signs = np.sign(W).reshape(-1, rows, k)
    template = np.where(np.arange(k) % 2 == 0, 1, -1)
    row_match = (signs == template).mean(axis=2)
    row_scores = np.maximum(row_match, (signs == -template).mean(axis=2))
    flat_match = row_match.mean(axis=1)
    glob = np.maximum(flat_match, (signs == -template).mean(axis=(1, 2)))
    pos = (signs > 0).reshape(len(signs), -1).mean(axis=1)
    uniform = np.maximum(pos, 1 - pos)
    return WeightPattern(
        signs.astype(np.int8), row_scores, float(row_scores.mean()), float(glob.mean()), float(uniform.mean())
    )


def agreement_with_condition(model: MLPModel, records: Sequence[DatasetRecord], condition: str) -> float:
    """Fraction of records where the network's class equals the condition's verdict."""
    X, _ = records_to_arrays(records)
    pred = model.predict(X)
    verdict = np.array([0 if satisfies(r.word, condition) else 1 for r in records])
    return float(np.mean(pred == verdict))
