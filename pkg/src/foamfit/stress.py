"""Piola stress components along the constrained loading paths.

Stresses are total derivatives of the free energy with respect to the
deformation-gradient entries that the experiments drive: ``P11 = dpsi/dlam``,
``P22 = dpsi/dalpha`` and ``P12 = dpsi/dgamma``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._core import term_stress_matrix
from .energy import ModelSpec, _state_values, partials_from, stretch_derivative
from .kinematics import invariant_arrays, isochoric_gradients, stretch_arrays, stretch_gradients

__all__ = [
    "StressResult",
    "uniaxial_stress",
    "shear_stress",
    "zero_stress_residual",
    "stress_at",
    "uniaxial_rows",
    "shear_rows",
    "predict_rows",
]


@dataclass(frozen=True)
class StressResult:
    p11: float = 0.0
    p22: float = 0.0
    p12: float = 0.0


def stress_at(model: ModelSpec, lam=1.0, alpha=1.0, gamma=0.0) -> StressResult:
    """All three components at an arbitrary constrained state.

    For gamma == 0 the in-plane stretches are lam and alpha themselves, so the
    principal-stretch route reduces to f'(lam) and f'(alpha).
    """
    inv, ps = _state_values(lam, alpha, gamma)
    part = partials_from(model, inv, None)
    g1, g2, gj = isochoric_gradients(lam, alpha, gamma)
    p = [part.d_i1_bar * g1[k] + part.d_i2_bar * g2[k] + part.d_j * gj[k] for k in range(3)]
    if gamma == 0.0:
        p[0] += stretch_derivative(model, lam)
        p[1] += stretch_derivative(model, alpha)
    else:
        (d1l, d1a), (d2l, d2a) = stretch_gradients(lam, alpha, gamma)
        f1 = stretch_derivative(model, ps.l1)
        f2 = stretch_derivative(model, ps.l2)
        p[0] += f1 * d1l + f2 * d2l
        p[1] += f1 * d1a + f2 * d2a
    p[2] += stretch_derivative(model, ps.l1) * ps.dl1_dgamma
    p[2] += stretch_derivative(model, ps.l2) * ps.dl2_dgamma
    return StressResult(float(p[0]), float(p[1]), float(p[2]))


def uniaxial_stress(model: ModelSpec, lam, alpha=1.0):
    """Return ``(p11, p22)`` in kPa at axial stretch ``lam``."""
    s = stress_at(model, lam, alpha, 0.0)
    return s.p11, s.p22


def shear_stress(model: ModelSpec, gamma, lam=1.0):
    """Return ``p12`` in kPa at shear strain ``gamma`` and axial stretch ``lam``."""
    inv, ps = _state_values(lam, 1.0, gamma)
    part = partials_from(model, inv, None)
    g1, g2, _ = isochoric_gradients(lam, 1.0, gamma)
    p12 = part.d_i1_bar * g1[2] + part.d_i2_bar * g2[2]
    p12 += stretch_derivative(model, ps.l1) * ps.dl1_dgamma
    p12 += stretch_derivative(model, ps.l2) * ps.dl2_dgamma
    return float(p12)


def zero_stress_residual(model: ModelSpec):
    s = stress_at(model, 1.0, 1.0, 0.0)
    return abs(s.p11) + abs(s.p22) + abs(s.p12)


# -- vectorized rows for the training kernel ----------------------------------


def uniaxial_rows(lam):
    """Kernel rows for P11 and P22 at the given axial stretches (alpha = 1).

    Returns ``(rows_p11, rows_p22)``, each of shape ``(n, 12)``.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    one = np.ones_like(lam)
    _, _, j, i1b, i2b = invariant_arrays(lam, one, 0.0 * lam)
    g1, g2, gj = isochoric_gradients(lam, one, 0.0 * lam)
    zero = np.zeros_like(lam)
    stretches = [lam, one, one]
    r11 = np.column_stack([i1b, i2b, j, g1[0], g2[0], gj[0] * one, *stretches, one, zero, zero])
    r22 = np.column_stack([i1b, i2b, j, g1[1], g2[1], gj[1] * one, *stretches, zero, one, zero])
    return r11, r22


def shear_rows(gamma, lam=1.0):
    """Kernel rows for P12 at the given shear strains and axial stretch."""
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    lam = np.full_like(gamma, lam)
    one = np.ones_like(gamma)
    _, _, j, i1b, i2b = invariant_arrays(lam, one, gamma)
    g1, g2, _ = isochoric_gradients(lam, one, gamma)
    l1, l2, dl1, dl2 = stretch_arrays(lam, one, gamma)
    zero = np.zeros_like(gamma)
    return np.column_stack([i1b, i2b, j, g1[2], g2[2], zero, l1, l2, one, dl1, dl2, zero])


def predict_rows(model: ModelSpec, rows):
    """Vectorized stress for every row (kPa)."""
    w, ws = model.to_arrays()
    G, _ = term_stress_matrix(rows, ws)
    return G @ w
