"""The 14-term free-energy library and its first derivatives.

Term numbering (fixed, 1-based):

====  ===========================================  ============
id    energy per unit outer weight                 inner weight
====  ===========================================  ============
1     [I1b - 3]                                    --
2     exp(w*[I1b - 3]) - 1                         yes
3     [I1b - 3]^2                                  --
4     exp(w*[I1b - 3]^2) - 1                       yes
5-8   same pattern in I2b                          6, 8
9     J^w* - w* ln J - 1                           yes
10    exp(w* (ln J)^2) - 1                         yes
11    J^w* [I1b - 3]                               yes
12    J^w* [I2b - 3]                               yes
13    sum_j [l_j^w* - w* ln l_j - 1]               yes
14    same as 13                                   yes
====  ===========================================  ============

All energies are in kPa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import DomainError, SaturationError
from .kinematics import (
    DeformationState,
    InvariantSet,
    PrincipalStretches,
    invariant_arrays,
    stretch_arrays,
)

N_TERMS = 14
TERM_IDS = tuple(range(1, N_TERMS + 1))
NO_INNER = frozenset({1, 3, 5, 7})
EXP_TERMS = frozenset({2, 4, 6, 8, 10})
PS_TERMS = frozenset({13, 14})

FORMS = {
    1: "[I1b - 3]",
    2: "[exp(w*[I1b - 3]) - 1]",
    3: "[I1b - 3]^2",
    4: "[exp(w*[I1b - 3]^2) - 1]",
    5: "[I2b - 3]",
    6: "[exp(w*[I2b - 3]) - 1]",
    7: "[I2b - 3]^2",
    8: "[exp(w*[I2b - 3]^2) - 1]",
    9: "[J^w* - w* ln(J) - 1]",
    10: "[exp(w* ln(J)^2) - 1]",
    11: "J^w* [I1b - 3]",
    12: "J^w* [I2b - 3]",
    13: "sum_j [l_j^w* - w* ln(l_j) - 1]",
    14: "sum_j [l_j^w* - w* ln(l_j) - 1]",
}

FAMILY = {
    **{i: "I1b" for i in (1, 2, 3, 4)},
    **{i: "I2b" for i in (5, 6, 7, 8)},
    9: "J",
    10: "J",
    11: "I1b,J",
    12: "I2b,J",
    13: "stretch",
    14: "stretch",
}


@dataclass(frozen=True)
class Term:
    term_id: int
    w: float
    w_star: float | None = None

    def __post_init__(self):
        if self.term_id not in FORMS:
            raise DomainError(f"unknown term id {self.term_id}")
        if not (self.w >= 0.0 and math.isfinite(self.w)):
            raise DomainError(f"term {self.term_id}: outer weight must be finite and >= 0, got {self.w}")
        if self.term_id in NO_INNER:
            if self.w_star not in (None, 0.0):
                raise DomainError(f"term {self.term_id} has no inner weight")
            object.__setattr__(self, "w_star", None)
        else:
            ws = 0.0 if self.w_star is None else self.w_star
            if not (ws >= 0.0 and math.isfinite(ws)):
                raise DomainError(f"term {self.term_id}: inner weight must be finite and >= 0, got {ws}")
            object.__setattr__(self, "w_star", float(ws))
        object.__setattr__(self, "w", float(self.w))

    def render(self):
        form = FORMS[self.term_id]
        if self.w_star is not None:
            form = form.replace("w*", f"{self.w_star:.6g}")
        return f"{self.w:.6g} kPa {form}"


@dataclass(frozen=True)
class ModelSpec:
    """Immutable set of active terms with their weights."""

    terms: tuple[Term, ...] = ()
    label: str = ""

    def __post_init__(self):
        terms = tuple(t if isinstance(t, Term) else Term(*t) for t in self.terms)
        ids = [t.term_id for t in terms]
        if len(set(ids)) != len(ids):
            raise DomainError(f"duplicate term ids in {ids}")
        object.__setattr__(self, "terms", tuple(sorted(terms, key=lambda t: t.term_id)))

    @classmethod
    def from_arrays(cls, w, w_star, label="", drop_zero=True):
        """Build from length-14 weight vectors (index 0 is term 1)."""
        terms = []
        for k in range(N_TERMS):
            tid = k + 1
            if drop_zero and w[k] == 0.0:
                continue
            terms.append(Term(tid, float(w[k]), None if tid in NO_INNER else float(w_star[k])))
        return cls(tuple(terms), label)

    def to_arrays(self):
        w = np.zeros(N_TERMS)
        ws = np.zeros(N_TERMS)
        for t in self.terms:
            w[t.term_id - 1] = t.w
            ws[t.term_id - 1] = t.w_star or 0.0
        return w, ws

    def active(self):
        return tuple(t for t in self.terms if t.w > 0.0)

    @property
    def nonzero_terms(self):
        return len(self.active())

    def render(self):
        if not self.active():
            return "psi = 0"
        return "psi = " + "\n    + ".join(t.render() for t in self.active())


# -- single term, scalar path ------------------------------------------------


def _exp(term_id, x):
    try:
        return math.exp(x)
    except OverflowError:
        raise SaturationError(term_id) from None


def _expm1(term_id, x):
    try:
        return math.expm1(x)
    except OverflowError:
        raise SaturationError(term_id) from None


def _check(inv, ps):
    if inv.j <= 0.0:
        raise DomainError(f"J must be positive, got {inv.j}")
    if ps is not None and min(ps.l1, ps.l2, ps.l3) <= 0.0:
        raise DomainError("principal stretches must be positive")


def _ps_energy(ws, s):
    if ws == 0.0:
        return 0.0
    return s**ws - ws * math.log(s) - 1.0


def term_energy(term_id, w, w_star, inv: InvariantSet, ps: PrincipalStretches | None = None):
    """Energy (kPa) of one library term at a given state."""
    _check(inv, ps)
    ws = w_star or 0.0
    x = inv.i1_bar - 3.0
    y = inv.i2_bar - 3.0
    j = inv.j
    if term_id == 1:
        e = x
    elif term_id == 2:
        e = _expm1(2, ws * x)
    elif term_id == 3:
        e = x * x
    elif term_id == 4:
        e = _expm1(4, ws * x * x)
    elif term_id == 5:
        e = y
    elif term_id == 6:
        e = _expm1(6, ws * y)
    elif term_id == 7:
        e = y * y
    elif term_id == 8:
        e = _expm1(8, ws * y * y)
    elif term_id == 9:
        e = 0.0 if ws == 0.0 else j**ws - ws * math.log(j) - 1.0
    elif term_id == 10:
        lnj = math.log(j)
        e = _expm1(10, ws * lnj * lnj)
    elif term_id == 11:
        e = j**ws * x
    elif term_id == 12:
        e = j**ws * y
    elif term_id in PS_TERMS:
        if ps is None:
            raise DomainError(f"term {term_id} needs principal stretches")
        e = sum(_ps_energy(ws, s) for s in ps.as_tuple())
    else:
        raise DomainError(f"unknown term id {term_id}")
    return w * e


def _state_values(lam, alpha, gamma):
    if not (lam > 0.0 and alpha > 0.0):
        raise DomainError(f"stretches must be positive, got lam={lam}, alpha={alpha}")
    i1, i2, j, i1b, i2b = invariant_arrays(float(lam), float(alpha), float(gamma))
    inv = InvariantSet(float(i1), float(i2), float(j), float(i1b), float(i2b))
    l1, l2, dl1, dl2 = stretch_arrays(lam, alpha, gamma)
    return inv, PrincipalStretches(l1, l2, 1.0, dl1, dl2)


def energy_at(model: ModelSpec, lam=1.0, alpha=1.0, gamma=0.0):
    """Free energy for raw ``(lam, alpha, gamma)``; no mode validation."""
    inv, ps = _state_values(lam, alpha, gamma)
    return sum(term_energy(t.term_id, t.w, t.w_star, inv, ps) for t in model.active())


def energy(model: ModelSpec, state: DeformationState):
    return energy_at(model, state.lam, state.alpha, state.gamma)


# -- first derivatives --------------------------------------------------------


@dataclass(frozen=True)
class EnergyPartials:
    """dpsi/dI1b, dpsi/dI2b, dpsi/dJ and f'(l_j) for the three principal stretches."""

    d_i1_bar: float = 0.0
    d_i2_bar: float = 0.0
    d_j: float = 0.0
    d_stretch: tuple[float, float, float] = field(default=(0.0, 0.0, 0.0))


def stretch_derivative(model: ModelSpec, s):
    """f'(s) summed over the active principal-stretch terms."""
    if s <= 0.0:
        raise DomainError(f"principal stretch must be positive, got {s}")
    out = 0.0
    for t in model.active():
        if t.term_id in PS_TERMS and t.w_star:
            out += t.w * t.w_star * (s ** (t.w_star - 1.0) - 1.0 / s)
    return out


def partials_from(model: ModelSpec, inv: InvariantSet, ps: PrincipalStretches | None = None):
    _check(inv, ps)
    x = inv.i1_bar - 3.0
    y = inv.i2_bar - 3.0
    j = inv.j
    d1 = d2 = dj = 0.0
    for t in model.active():
        tid, w, ws = t.term_id, t.w, t.w_star or 0.0
        if tid == 1:
            d1 += w
        elif tid == 2:
            d1 += w * ws * _exp(2, ws * x)
        elif tid == 3:
            d1 += 2.0 * w * x
        elif tid == 4:
            d1 += 2.0 * w * ws * x * _exp(4, ws * x * x)
        elif tid == 5:
            d2 += w
        elif tid == 6:
            d2 += w * ws * _exp(6, ws * y)
        elif tid == 7:
            d2 += 2.0 * w * y
        elif tid == 8:
            d2 += 2.0 * w * ws * y * _exp(8, ws * y * y)
        elif tid == 9:
            dj += w * ws * (j ** (ws - 1.0) - 1.0 / j)
        elif tid == 10:
            lnj = math.log(j)
            dj += 2.0 * w * ws * lnj / j * _exp(10, ws * lnj * lnj)
        elif tid == 11:
            d1 += w * j**ws
            dj += w * ws * j ** (ws - 1.0) * x
        elif tid == 12:
            d2 += w * j**ws
            dj += w * ws * j ** (ws - 1.0) * y
    if ps is None:
        dps = (0.0, 0.0, 0.0)
    else:
        dps = tuple(stretch_derivative(model, s) for s in ps.as_tuple())
    return EnergyPartials(d1, d2, dj, dps)


def energy_partials(model: ModelSpec, state: DeformationState) -> EnergyPartials:
    inv, ps = _state_values(state.lam, state.alpha, state.gamma)
    return partials_from(model, inv, ps)


def make_model(spec: Iterable, label=""):
    """Shorthand: ``make_model([(1, 26.9), (9, 70.3, 1.06)])``."""
    return ModelSpec(tuple(Term(*t) for t in spec), label)
