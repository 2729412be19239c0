"""Constrained kinematics for tension, compression and simple shear.

The deformation gradient is restricted to

    F = [[lam, gamma, 0],
         [0,   alpha, 0],
         [0,   0,     1]]

so every quantity below has a closed form in ``(lam, alpha, gamma)``.  The
array helpers (``invariant_arrays``, ``isochoric_gradients``,
``stretch_arrays``) accept scalars or numpy arrays and are what the stress
and training code use; the dataclass wrappers validate and return value types.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "Mode",
    "DeformationState",
    "InvariantSet",
    "PrincipalStretches",
    "invariants",
    "principal_stretches",
    "invariant_arrays",
    "isochoric_gradients",
    "stretch_arrays",
    "stretch_gradients",
    "deformation_gradient",
]


class Mode(str, enum.Enum):
    TENSION = "tension"
    COMPRESSION = "compression"
    SHEAR = "shear"


@dataclass(frozen=True)
class DeformationState:
    """Loading mode plus the three scalars of the constrained deformation gradient."""

    mode: Mode
    lam: float = 1.0
    alpha: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not (self.lam > 0.0 and self.alpha > 0.0):
            raise DomainError(f"stretches must be positive, got lam={self.lam}, alpha={self.alpha}")
        if self.mode is Mode.TENSION and (self.gamma != 0.0 or self.lam < 1.0):
            raise DomainError("tension requires gamma == 0 and lam >= 1")
        if self.mode is Mode.COMPRESSION and (self.gamma != 0.0 or self.lam > 1.0):
            raise DomainError("compression requires gamma == 0 and lam <= 1")

    @classmethod
    def tension(cls, lam):
        return cls(Mode.TENSION, lam=lam)

    @classmethod
    def compression(cls, lam):
        return cls(Mode.COMPRESSION, lam=lam)

    @classmethod
    def shear(cls, gamma, lam=1.0):
        return cls(Mode.SHEAR, lam=lam, gamma=gamma)

    @classmethod
    def identity(cls):
        return cls(Mode.TENSION)


@dataclass(frozen=True)
class InvariantSet:
    i1: float
    i2: float
    j: float
    i1_bar: float
    i2_bar: float


@dataclass(frozen=True)
class PrincipalStretches:
    """Singular values of F.

    ``l1 >= l2`` are the in-plane stretches, ``l3 = 1`` the out-of-plane one.
    The gamma-derivatives refer to ``l1`` and ``l2`` (``l3`` never changes).
    """

    l1: float
    l2: float
    l3: float
    dl1_dgamma: float = 0.0
    dl2_dgamma: float = 0.0

    def as_tuple(self):
        return (self.l1, self.l2, self.l3)

    def descending(self):
        """The three stretches sorted largest first."""
        return tuple(sorted(self.as_tuple(), reverse=True))


def deformation_gradient(lam, alpha=1.0, gamma=0.0):
    return np.array([[lam, gamma, 0.0], [0.0, alpha, 0.0], [0.0, 0.0, 1.0]])


def invariant_arrays(lam, alpha=1.0, gamma=0.0):
    """Return ``(i1, i2, j, i1_bar, i2_bar)`` for scalars or arrays."""
    lam2 = lam * lam
    alpha2 = alpha * alpha
    gamma2 = gamma * gamma
    i1 = 1.0 + alpha2 + lam2 + gamma2
    i2 = alpha2 + gamma2 + lam2 + alpha2 * lam2
    j = lam * alpha
    j13 = np.cbrt(j)
    i1_bar = i1 / (j13 * j13)
    i2_bar = i2 / (j13 * j13 * j13 * j13)
    return i1, i2, j, i1_bar, i2_bar


def isochoric_gradients(lam, alpha=1.0, gamma=0.0):
    """Partial derivatives of ``(i1_bar, i2_bar, j)`` w.r.t. ``(lam, alpha, gamma)``.

    Returns a 3x3 nested tuple ``grad[q][v]`` with q in (i1_bar, i2_bar, j) and
    v in (lam, alpha, gamma).
    """
    i1, i2, j, i1_bar, i2_bar = invariant_arrays(lam, alpha, gamma)
    # d(j)/d(lam, alpha, gamma)
    dj = (alpha, lam, 0.0 * gamma)
    di1 = (2.0 * lam, 2.0 * alpha, 2.0 * gamma)
    di2 = (2.0 * lam * (1.0 + alpha * alpha), 2.0 * alpha * (1.0 + lam * lam), 2.0 * gamma)
    # i1_bar = i1 j^(-2/3)  ->  d i1_bar = j^(-2/3) d i1 - (2/3) i1_bar / j  d j
    g1 = tuple(i1_bar * (a / i1) - (2.0 / 3.0) * i1_bar * b / j for a, b in zip(di1, dj))
    g2 = tuple(i2_bar * (a / i2) - (4.0 / 3.0) * i2_bar * b / j for a, b in zip(di2, dj))
    return g1, g2, dj


def stretch_arrays(lam, alpha=1.0, gamma=0.0):
    """In-plane principal stretches and their gamma-derivatives.

    Returns ``(l1, l2, dl1, dl2)`` with ``l1 >= l2``; the out-of-plane stretch
    is identically one.  ``l2`` is taken as ``j / l1`` so that the product of
    the three stretches reproduces ``j`` to rounding.
    """
    lam = np.asarray(lam, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    lam2 = lam * lam
    alpha2 = alpha * alpha
    gamma2 = gamma * gamma
    tr = lam2 + alpha2 + gamma2
    # tr^2 - 4 det written as a sum of squares: never negative, no cancellation
    disc = np.sqrt((lam2 - alpha2) ** 2 + 2.0 * gamma2 * (lam2 + alpha2) + gamma2 * gamma2)
    l1 = np.sqrt(0.5 * (tr + disc))
    j = lam * alpha
    l2 = j / l1
    degenerate = disc == 0.0
    safe = np.where(degenerate, 1.0, disc)
    dl1 = np.where(degenerate, 0.5, 0.5 * gamma * (1.0 + tr / safe) / l1)
    # l2 = j / l1 with j independent of gamma
    dl2 = -j / (l1 * l1) * dl1
    if l1.ndim == 0:
        return float(l1), float(l2), float(dl1), float(dl2)
    return l1, l2, dl1, dl2


def stretch_gradients(lam, alpha, gamma):
    """d(l1, l2)/d(lam, alpha) for gamma != 0, where the in-plane stretches are distinct.

    Returns ``((dl1_dlam, dl1_dalpha), (dl2_dlam, dl2_dalpha))``.
    """
    lam2, alpha2, gamma2 = lam * lam, alpha * alpha, gamma * gamma
    tr = lam2 + alpha2 + gamma2
    disc = np.sqrt((lam2 - alpha2) ** 2 + 2.0 * gamma2 * (lam2 + alpha2) + gamma2 * gamma2)
    l1 = np.sqrt(0.5 * (tr + disc))
    j = lam * alpha
    l2 = j / l1
    out1 = []
    out2 = []
    # d(tr), d(det) with det = lam^2 alpha^2, and d(j)
    for dtr, ddet, dj in ((2.0 * lam, 2.0 * lam * alpha2, alpha), (2.0 * alpha, 2.0 * alpha * lam2, lam)):
        dsq = 0.5 * (dtr + (tr * dtr - 2.0 * ddet) / disc)
        d1 = dsq / (2.0 * l1)
        out1.append(d1)
        out2.append((dj - l2 * d1) / l1)
    return tuple(out1), tuple(out2)


def invariants(state: DeformationState) -> InvariantSet:
    i1, i2, j, i1_bar, i2_bar = invariant_arrays(
        float(state.lam), float(state.alpha), float(state.gamma)
    )
    return InvariantSet(float(i1), float(i2), float(j), float(i1_bar), float(i2_bar))


def principal_stretches(state: DeformationState) -> PrincipalStretches:
    """Closed-form singular values of F; no eigendecomposition."""
    l1, l2, dl1, dl2 = stretch_arrays(state.lam, state.alpha, state.gamma)
    return PrincipalStretches(l1, l2, 1.0, dl1, dl2)
