"""Pure numpy implementation of the row kernel."""

import numpy as np

N_TERMS = 14


def _ps(s, d, ws):
    if ws == 0.0:
        z = np.zeros(s.shape[0])
        return z, z
    pw = s ** (ws - 1.0)
    inv = 1.0 / s
    fp = ws * (pw - inv)
    dfp = (pw - inv) + ws * pw * np.log(s)
    return (fp * d).sum(axis=1), (dfp * d).sum(axis=1)


def term_stress_matrix(rows, w_star):
    rows = np.asarray(rows, dtype=np.float64)
    w_star = np.asarray(w_star, dtype=np.float64)
    n = rows.shape[0]
    G = np.zeros((n, N_TERMS))
    dG = np.zeros((n, N_TERMS))
    x = rows[:, 0] - 3.0
    y = rows[:, 1] - 3.0
    j = rows[:, 2]
    c1, c2, cj = rows[:, 3], rows[:, 4], rows[:, 5]
    s = rows[:, 6:9]
    d = rows[:, 9:12]
    lnj = np.log(j)

    for base, v, c in ((0, x, c1), (4, y, c2)):
        # linear
        G[:, base] = c
        # exp-linear
        ws = w_star[base + 1]
        e = np.exp(ws * v)
        G[:, base + 1] = ws * e * c
        dG[:, base + 1] = e * (1.0 + ws * v) * c
        # quadratic
        G[:, base + 2] = 2.0 * v * c
        # exp-quadratic
        ws = w_star[base + 3]
        e = np.exp(ws * v * v)
        G[:, base + 3] = 2.0 * ws * v * e * c
        dG[:, base + 3] = 2.0 * v * e * (1.0 + ws * v * v) * c

    ws = w_star[8]
    pw = j ** (ws - 1.0)
    G[:, 8] = ws * (pw - 1.0 / j) * cj
    dG[:, 8] = ((pw - 1.0 / j) + ws * pw * lnj) * cj

    ws = w_star[9]
    e = np.exp(ws * lnj * lnj)
    G[:, 9] = 2.0 * ws * lnj / j * e * cj
    dG[:, 9] = 2.0 * lnj / j * e * (1.0 + ws * lnj * lnj) * cj

    for k, v, c in ((10, x, c1), (11, y, c2)):
        ws = w_star[k]
        jw = j**ws
        jw1 = j ** (ws - 1.0)
        G[:, k] = jw * c + ws * jw1 * v * cj
        dG[:, k] = jw * lnj * c + v * jw1 * (1.0 + ws * lnj) * cj

    for k in (12, 13):
        G[:, k], dG[:, k] = _ps(s, d, w_star[k])
    return G, dG
