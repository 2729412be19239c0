"""Independent reference implementations used by the tests.

Nothing here shares code with the library beyond the ``ModelSpec`` container:
invariants come from the explicit 3x3 matrices, stretches from an SVD and
derivatives from central differences.
"""

import math

import numpy as np

from foamfit.energy import EXP_TERMS, NO_INNER, ModelSpec, Term

# inner-weight ranges that keep every term finite on the test grids
INNER_RANGE = {2: 2.0, 4: 2.0, 6: 1.0, 8: 1.0, 9: 8.0, 10: 2.0, 11: 6.0, 12: 6.0, 13: 8.0, 14: 8.0}


def matrix_F(lam, alpha=1.0, gamma=0.0):
    return np.array([[lam, gamma, 0.0], [0.0, alpha, 0.0], [0.0, 0.0, 1.0]])


def matrix_invariants(lam, alpha=1.0, gamma=0.0):
    """``(i1, i2, j, i1_bar, i2_bar)`` via trace, cofactor and determinant."""
    F = matrix_F(lam, alpha, gamma)
    C = F.T @ F
    i1 = np.trace(C)
    cof = np.linalg.det(C) * np.linalg.inv(C).T
    i2 = np.trace(cof)
    j = np.linalg.det(F)
    return i1, i2, j, i1 / j ** (2.0 / 3.0), i2 / j ** (4.0 / 3.0)


def svd_stretches(lam, alpha=1.0, gamma=0.0):
    return np.linalg.svd(matrix_F(lam, alpha, gamma), compute_uv=False)


def central_difference(f, x, h):
    return (f(x + h) - f(x - h)) / (2.0 * h)


def brute_energy(model: ModelSpec, lam, alpha=1.0, gamma=0.0):
    """Energy from matrix invariants and SVD stretches, written out term by term."""
    _, _, j, i1b, i2b = matrix_invariants(lam, alpha, gamma)
    stretches = svd_stretches(lam, alpha, gamma)
    x, y, lnj = i1b - 3.0, i2b - 3.0, math.log(j)
    total = 0.0
    for t in model.active():
        ws = t.w_star or 0.0
        forms = {
            1: lambda: x,
            2: lambda: math.exp(ws * x) - 1.0,
            3: lambda: x * x,
            4: lambda: math.exp(ws * x * x) - 1.0,
            5: lambda: y,
            6: lambda: math.exp(ws * y) - 1.0,
            7: lambda: y * y,
            8: lambda: math.exp(ws * y * y) - 1.0,
            9: lambda: j**ws - ws * lnj - 1.0,
            10: lambda: math.exp(ws * lnj * lnj) - 1.0,
            11: lambda: j**ws * x,
            12: lambda: j**ws * y,
            13: lambda: sum(s**ws - ws * math.log(s) - 1.0 for s in stretches),
            14: lambda: sum(s**ws - ws * math.log(s) - 1.0 for s in stretches),
        }
        total += t.w * forms[t.term_id]()
    return total


def random_model(rng, term_ids=range(1, 15), w_max=10.0, p_active=0.7, label="random"):
    terms = []
    for tid in term_ids:
        if rng.random() > p_active:
            continue
        w = float(rng.uniform(0.0, w_max))
        ws = None if tid in NO_INNER else float(rng.uniform(0.0, INNER_RANGE[tid]))
        if tid in EXP_TERMS and ws is not None:
            ws = max(ws, 1e-3)
        terms.append(Term(tid, w, ws))
    return ModelSpec(tuple(terms), label)


def random_state(rng):
    """Random admissible (lam, alpha, gamma) away from the degenerate gamma = 0 shear corner."""
    lam = float(rng.uniform(0.4, 1.4))
    alpha = float(rng.uniform(0.8, 1.2))
    gamma = float(rng.choice([0.0, rng.uniform(0.02, 0.4)]))
    return lam, alpha, gamma


def relative_error(a, b, floor):
    return abs(a - b) / max(abs(b), floor)
