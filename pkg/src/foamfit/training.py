"""Loss, gradients and the two-stage projected-Adam fit.

The loss on a :class:`~foamfit.dataproc.FoamDataset` is::

    L = sum_ten [(P11 - P)^2 + P22^2] / Pten^2
      + sum_com [(P11 - P)^2 + P22^2] / Pcom^2
      + sum_shr (P12 - P)^2 / Pshr^2
      + alpha * sum_i sqrt(w_i / penalty_unit)

with ``Pten``, ``Pcom``, ``Pshr`` the extreme data stresses of each mode.
Weights are kept in kPa; ``penalty_unit`` (default 1000 kPa) sets the unit in
which the square-root penalty is evaluated.

Every data point is turned into one or two kernel rows (see
:mod:`foamfit._core`), so a model evaluation is ``G @ w`` with ``G`` from the
compiled kernel, and gradients with respect to both outer and inner weights
are closed-form.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ._core import term_stress_matrix
from .dataproc import FoamDataset
from .energy import EXP_TERMS, N_TERMS, NO_INNER, ModelSpec
from .errors import DomainError, NormalizationError, TrainingError
from .report import TRACE_COLUMNS, FitReport, r_squared
from .stress import shear_rows, uniaxial_rows

__all__ = [
    "Architecture",
    "ARCHITECTURE_TERMS",
    "TrainConfig",
    "LossBreakdown",
    "loss",
    "loss_gradient",
    "predict_modes",
    "fit",
    "sparsity_sweep",
    "write_loss_trace",
    "read_loss_trace",
]


class Architecture(str, enum.Enum):
    SI = "SI"
    SI_MI = "SI_MI"
    SI_PS = "SI_PS"
    ALL = "ALL"

    @classmethod
    def parse(cls, value):
        """Accept ``SI_MI``, ``si-mi``, ``SI+MI`` and friends."""
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper().replace("-", "_").replace("+", "_")
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"unknown architecture {value!r}") from None

    @property
    def cli_name(self):
        return self.value.lower().replace("_", "-")


ARCHITECTURE_TERMS = {
    Architecture.SI: tuple(range(1, 11)),
    Architecture.SI_MI: tuple(range(1, 13)),
    Architecture.SI_PS: tuple(range(1, 11)) + (13, 14),
    Architecture.ALL: tuple(range(1, 15)),
}

_EXP_IDX = np.array(sorted(EXP_TERMS)) - 1
_INNER = np.array([tid not in NO_INNER for tid in range(1, N_TERMS + 1)])


@dataclass(frozen=True)
class TrainConfig:
    """Hyper-parameters of one fit.

    Stage 1 runs ``warm_epochs`` with ``alpha = 0``.  Stage 2 continues from
    the stage-1 weights with the configured ``alpha`` for ``epochs`` epochs
    (``stage2_full=True``) or for the remaining ``epochs - warm_epochs``.
    """

    architecture: Architecture = Architecture.SI_MI
    alpha: float = 0.0
    epochs: int = 15000
    warm_epochs: int = 5000
    batch_size: int = 64
    learning_rate: float = 0.01
    seed: int = 0
    penalty_unit: float = 1000.0
    prune_tol: float = 1e-4
    stage2_full: bool = True
    init_outer: float = 1.0
    init_inner: float = 2.0
    inner_floor: float = 1e-6
    trace_every: int = 100

    def __post_init__(self):
        object.__setattr__(self, "architecture", Architecture.parse(self.architecture))
        if not (self.alpha >= 0.0 and np.isfinite(self.alpha)):
            raise DomainError(f"alpha must be finite and >= 0, got {self.alpha}")
        if self.epochs < 0 or self.warm_epochs < 0 or self.warm_epochs > self.epochs:
            raise DomainError("need 0 <= warm_epochs <= epochs")
        if self.batch_size < 1:
            raise DomainError("batch_size must be positive")
        if not self.learning_rate > 0.0:
            raise DomainError("learning_rate must be positive")
        if not self.penalty_unit > 0.0:
            raise DomainError("penalty_unit must be positive")
        if self.trace_every < 1:
            raise DomainError("trace_every must be positive")

    @property
    def stage2_epochs(self):
        return self.epochs if self.stage2_full else self.epochs - self.warm_epochs

    def trainable(self):
        mask = np.zeros(N_TERMS, dtype=bool)
        mask[np.array(ARCHITECTURE_TERMS[self.architecture]) - 1] = True
        return mask


@dataclass(frozen=True)
class LossBreakdown:
    tension_term: float
    compression_term: float
    shear_term: float
    p22_penalty: float
    regularization: float

    @property
    def total(self):
        return self.tension_term + self.compression_term + self.shear_term + self.p22_penalty + self.regularization

    def as_row(self, epoch):
        return (
            float(epoch),
            self.total,
            self.tension_term,
            self.compression_term,
            self.shear_term,
            self.p22_penalty,
            self.regularization,
        )


# -- problem assembly ---------------------------------------------------------

TEN, COM, SHR, P22 = range(4)


@dataclass(frozen=True)
class _Problem:
    rows: np.ndarray
    target: np.ndarray
    scale: np.ndarray  # 1 / normalizer^2 per row
    group: np.ndarray
    point: np.ndarray  # data point owning each row
    n_points: int


def _normalizer(y, name):
    peak = float(np.max(np.abs(y)))
    if peak == 0.0:
        raise NormalizationError(f"{name} data stresses are all zero")
    return 1.0 / (peak * peak)


def _problem(data: FoamDataset) -> _Problem:
    t, c, s = data.tension, data.compression, data.shear
    nt, nc, ns = len(t), len(c), len(s)
    r11t, r22t = uniaxial_rows(t.x)
    r11c, r22c = uniaxial_rows(c.x)
    r12 = shear_rows(s.x, data.shear_stretch)
    kt, kc, ks = _normalizer(t.y, "tension"), _normalizer(c.y, "compression"), _normalizer(s.y, "shear")
    rows = np.vstack([r11t, r22t, r11c, r22c, r12])
    target = np.concatenate([t.y, np.zeros(nt), c.y, np.zeros(nc), s.y])
    scale = np.concatenate([np.full(2 * nt, kt), np.full(2 * nc, kc), np.full(ns, ks)])
    group = np.concatenate([np.full(nt, TEN), np.full(nt, P22), np.full(nc, COM), np.full(nc, P22), np.full(ns, SHR)])
    pt = np.arange(nt)
    pc = nt + np.arange(nc)
    point = np.concatenate([pt, pt, pc, pc, nt + nc + np.arange(ns)])
    for a in (rows, target, scale, group, point):
        a.setflags(write=False)
    return _Problem(rows, target, scale, group, point, nt + nc + ns)


def _breakdown(prob: _Problem, w, ws, alpha, penalty_unit):
    G, _ = term_stress_matrix(prob.rows, ws)
    res = G @ w - prob.target
    e = prob.scale * res * res
    parts = np.bincount(prob.group, weights=e, minlength=4)
    reg = alpha * float(np.sum(np.sqrt(np.maximum(w, 0.0) / penalty_unit)))
    return LossBreakdown(float(parts[TEN]), float(parts[COM]), float(parts[SHR]), float(parts[P22]), reg)


def _reg_grad(w, alpha, penalty_unit):
    # d/dw alpha sqrt(w / u) = alpha / (2 sqrt(w u)); subgradient 0 at w = 0
    out = np.zeros_like(w)
    if alpha > 0.0:
        pos = w > 0.0
        out[pos] = 0.5 * alpha / np.sqrt(w[pos] * penalty_unit)
    return out


def _gradient(rows, target, scale, w, ws, alpha, penalty_unit):
    """Loss value and gradients with respect to (w, w*) on a set of rows."""
    G, dG = term_stress_matrix(rows, ws)
    res = G @ w - target
    r = 2.0 * scale * res
    gw = r @ G + _reg_grad(w, alpha, penalty_unit)
    gws = (r @ dG) * w
    value = float(np.sum(scale * res * res))
    return value, gw, gws


def loss(model: ModelSpec, data: FoamDataset, alpha=0.0, penalty_unit=1000.0) -> LossBreakdown:
    """Loss components of ``model`` on ``data``; regularization covers its outer weights."""
    w, ws = model.to_arrays()
    return _breakdown(_problem(data), w, ws, alpha, penalty_unit)


def loss_gradient(model: ModelSpec, data: FoamDataset, alpha=0.0, penalty_unit=1000.0):
    """Gradients ``(dL/dw, dL/dw*)`` as length-14 arrays (index 0 is term 1).

    Entries for terms without an inner weight are zero in the second array.
    """
    w, ws = model.to_arrays()
    p = _problem(data)
    _, gw, gws = _gradient(p.rows, p.target, p.scale, w, ws, alpha, penalty_unit)
    return gw, np.where(_INNER, gws, 0.0)


def predict_modes(model: ModelSpec, data: FoamDataset):
    """Model stresses on the dataset grids: ``{"ten": P11, "com": P11, "shr": P12}``."""
    w, ws = model.to_arrays()
    out = {}
    for key, curve, rows in (
        ("ten", data.tension, lambda x: uniaxial_rows(x)[0]),
        ("com", data.compression, lambda x: uniaxial_rows(x)[0]),
        ("shr", data.shear, lambda x: shear_rows(x, data.shear_stretch)),
    ):
        G, _ = term_stress_matrix(rows(curve.x), ws)
        out[key] = G @ w
    return out


def mode_r2(model: ModelSpec, data: FoamDataset):
    pred = predict_modes(model, data)
    return {
        "ten": r_squared(pred["ten"], data.tension.y),
        "com": r_squared(pred["com"], data.compression.y),
        "shr": r_squared(pred["shr"], data.shear.y),
    }


# -- optimizer ----------------------------------------------------------------


class _State:
    """Mutable optimizer state: weights, Adam moments and the shuffle RNG."""

    def __init__(self, config: TrainConfig):
        rng = np.random.default_rng(config.seed)
        self.mask = config.trainable()
        self.inner_mask = self.mask & _INNER
        self.floor_mask = np.zeros(N_TERMS, dtype=bool)
        self.floor_mask[_EXP_IDX] = True
        self.floor_mask &= self.mask
        self.w = rng.uniform(0.0, config.init_outer, N_TERMS) * self.mask
        self.ws = rng.uniform(0.0, config.init_inner, N_TERMS) * self.inner_mask
        self.ws[self.floor_mask] = np.maximum(self.ws[self.floor_mask], config.inner_floor)
        self.m = np.zeros(2 * N_TERMS)
        self.v = np.zeros(2 * N_TERMS)
        self.t = 0
        self.epoch = 0
        self.rng = rng
        self.trace = []

    def copy(self):
        new = object.__new__(_State)
        new.__dict__.update(self.__dict__)
        for name in ("w", "ws", "m", "v"):
            setattr(new, name, getattr(self, name).copy())
        new.rng = np.random.default_rng()
        new.rng.bit_generator.state = self.rng.bit_generator.state
        new.trace = list(self.trace)
        return new


BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-7


def _adam_step(state: _State, gw, gws, config: TrainConfig):
    g = np.concatenate([gw * state.mask, gws * state.inner_mask])
    state.t += 1
    state.m = BETA1 * state.m + (1.0 - BETA1) * g
    state.v = BETA2 * state.v + (1.0 - BETA2) * g * g
    mh = state.m / (1.0 - BETA1**state.t)
    vh = state.v / (1.0 - BETA2**state.t)
    step = config.learning_rate * mh / (np.sqrt(vh) + EPS)
    # projection onto the admissible set
    state.w = np.maximum(state.w - step[:N_TERMS], 0.0) * state.mask
    ws = np.maximum(state.ws - step[N_TERMS:], 0.0) * state.inner_mask
    ws[state.floor_mask] = np.maximum(ws[state.floor_mask], config.inner_floor)
    state.ws = ws


def _run_stage(state: _State, prob: _Problem, config: TrainConfig, alpha, n_epochs, total_epochs):
    full = config.batch_size >= prob.n_points
    for _ in range(n_epochs):
        state.epoch += 1
        if full:
            batches = (None,)
        else:
            order = state.rng.permutation(prob.n_points)
            batches = [order[i : i + config.batch_size] for i in range(0, prob.n_points, config.batch_size)]
        for batch in batches:
            if batch is None:
                rows, target, scale = prob.rows, prob.target, prob.scale
            else:
                sel = np.isin(prob.point, batch)
                rows, target, scale = prob.rows[sel], prob.target[sel], prob.scale[sel]
            value, gw, gws = _gradient(rows, target, scale, state.w, state.ws, alpha, config.penalty_unit)
            if not (np.isfinite(value) and np.all(np.isfinite(gw)) and np.all(np.isfinite(gws))):
                raise TrainingError(state.epoch)
            _adam_step(state, gw, gws, config)
        if state.epoch % config.trace_every == 0 or state.epoch == total_epochs:
            b = _breakdown(prob, state.w, state.ws, alpha, config.penalty_unit)
            if not np.isfinite(b.total):
                raise TrainingError(state.epoch)
            state.trace.append(b.as_row(state.epoch))


def _finish(state: _State, data: FoamDataset, config: TrainConfig) -> FitReport:
    w = state.w.copy()
    if w.max() > 0.0:
        w[w < config.prune_tol * w.max()] = 0.0
    label = f"{data.label} {config.architecture.value} alpha={config.alpha:g}".strip()
    model = ModelSpec.from_arrays(w, state.ws, label=label)
    return FitReport(
        model=model,
        r2=mode_r2(model, data),
        nonzero_terms=model.nonzero_terms,
        alpha=float(config.alpha),
        architecture=config.architecture.value,
        loss_trace=tuple(state.trace),
        seed=config.seed,
    )


def fit(config: TrainConfig, data: FoamDataset) -> FitReport:
    """Two-stage fit: unregularized warm start, then the configured ``alpha``."""
    prob = _problem(data)
    state = _State(config)
    total = config.warm_epochs + config.stage2_epochs
    _run_stage(state, prob, config, 0.0, config.warm_epochs, total)
    _run_stage(state, prob, config, config.alpha, config.stage2_epochs, total)
    return _finish(state, data, config)


def sparsity_sweep(config: TrainConfig, data: FoamDataset, alphas):
    """One report per ``alpha``, all continuing from the shared unregularized warm start.

    Each entry equals ``fit(replace(config, alpha=a), data)``.
    """
    alphas = [float(a) for a in alphas]
    if any(b < a for a, b in zip(alphas, alphas[1:])):
        raise DomainError("alphas must be sorted ascending")
    prob = _problem(data)
    warm = _State(config)
    total = config.warm_epochs + config.stage2_epochs
    _run_stage(warm, prob, config, 0.0, config.warm_epochs, total)
    reports = []
    for a in alphas:
        cfg = replace(config, alpha=a)
        state = warm.copy()
        _run_stage(state, prob, cfg, a, cfg.stage2_epochs, total)
        reports.append(_finish(state, data, cfg))
    return reports


# -- trace I/O ----------------------------------------------------------------


def write_loss_trace(path, trace):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for row in trace:
            w.writerow([str(int(row[0]))] + [repr(float(v)) for v in row[1:]])
    return path


def read_loss_trace(path):
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != TRACE_COLUMNS:
            raise DomainError(f"{path}: unexpected loss-trace header")
        return tuple(tuple(float(v) for v in row) for row in reader if row)
