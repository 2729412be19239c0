"""Fit results, goodness of fit and convexity flags.

Kept separate from :mod:`foamfit.training` and :mod:`foamfit.discovery` so
both can produce and consume :class:`FitReport` without importing each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .energy import TERM_IDS, ModelSpec
from .errors import DomainError

__all__ = [
    "MODES",
    "FitReport",
    "r_squared",
    "polyconvexity_flags",
    "CONVEX",
    "VIOLATES",
    "CONDITIONAL",
]

MODES = ("ten", "com", "shr")

CONVEX = "convex"
VIOLATES = "violates"
CONDITIONAL = "conditional"

# exponent above which J^w* [I1b - 3] is no longer polyconvex
TERM11_LIMIT = 2.0 / 3.0

TRACE_COLUMNS = ("epoch", "total", "tension", "compression", "shear", "p22", "reg")


def r_squared(predicted, observed):
    """Coefficient of determination ``1 - SS_res / SS_tot``.

    Accepts arrays or :class:`~foamfit.dataproc.Curve` objects; curves must
    share their x-grid.
    """
    if hasattr(predicted, "x") and hasattr(observed, "x"):
        if predicted.x.shape != observed.x.shape or not np.allclose(predicted.x, observed.x, rtol=1e-12, atol=0.0):
            raise DomainError("r_squared needs curves on the same x-grid")
        predicted, observed = predicted.y, observed.y
    p = np.asarray(predicted, dtype=float)
    o = np.asarray(observed, dtype=float)
    if p.shape != o.shape:
        raise DomainError(f"shape mismatch {p.shape} vs {o.shape}")
    ss_tot = float(np.sum((o - o.mean()) ** 2))
    if ss_tot == 0.0:
        raise DomainError("R^2 is undefined for a constant observed curve")
    return 1.0 - float(np.sum((p - o) ** 2)) / ss_tot


def polyconvexity_flags(model: ModelSpec):
    """Per-term flag for all 14 library terms.

    Inactive terms and the single-invariant and principal-stretch families are
    ``convex``.  Term 11 ``violates`` for w* > 2/3 and is ``conditional``
    otherwise; term 12 ``violates`` whenever it is active.
    """
    flags = {tid: CONVEX for tid in TERM_IDS}
    for t in model.active():
        if t.term_id == 11:
            flags[11] = VIOLATES if t.w_star > TERM11_LIMIT else CONDITIONAL
        elif t.term_id == 12:
            flags[12] = VIOLATES
    return flags


@dataclass(frozen=True)
class FitReport:
    """Outcome of one fit: model, per-mode R^2 and bookkeeping.

    ``loss_trace`` holds rows of :data:`TRACE_COLUMNS` as a tuple of tuples so
    that reports compare by value.
    """

    model: ModelSpec
    r2: dict
    nonzero_terms: int
    alpha: float
    architecture: str
    polyconvexity: dict = field(default_factory=dict)
    loss_trace: tuple = ()
    seed: int | None = None
    warning: str | None = None

    def __post_init__(self):
        if self.nonzero_terms != self.model.nonzero_terms:
            raise DomainError(
                f"nonzero_terms={self.nonzero_terms} disagrees with the model ({self.model.nonzero_terms})"
            )
        if not self.polyconvexity:
            object.__setattr__(self, "polyconvexity", polyconvexity_flags(self.model))

    @property
    def min_r2(self):
        return min(self.r2[m] for m in MODES)

    def with_warning(self, message):
        return FitReport(
            self.model,
            self.r2,
            self.nonzero_terms,
            self.alpha,
            self.architecture,
            self.polyconvexity,
            self.loss_trace,
            self.seed,
            message,
        )

    def trace_array(self):
        return np.array(self.loss_trace, dtype=float).reshape(-1, len(TRACE_COLUMNS))
