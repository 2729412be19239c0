import math

import numpy as np
import pytest
from oracles import brute_energy, central_difference, random_model, random_state

from foamfit.discovery import printed_model
from foamfit.energy import (
    FORMS,
    ModelSpec,
    Term,
    energy,
    energy_at,
    energy_partials,
    make_model,
    partials_from,
    term_energy,
)
from foamfit.errors import DomainError, SaturationError
from foamfit.kinematics import DeformationState, InvariantSet, invariants, principal_stretches

T13 = DeformationState.tension(1.3)


def test_term9_identity_is_zero():
    inv = invariants(DeformationState.identity())
    assert term_energy(9, 70.3, 1.06, inv) == 0.0


def test_term9_by_hand():
    inv = invariants(T13)
    e = term_energy(9, 70.3, 1.06, inv)
    assert e == pytest.approx(70.3 * (1.3**1.06 - 1.06 * math.log(1.3) - 1.0), rel=1e-14)
    # bracket = 0.042524..., so about 2.99 kPa
    assert e == pytest.approx(2.9892, abs=1e-4)


def test_term11_by_hand():
    inv = invariants(T13)
    e = term_energy(11, 79.0, 4.86, inv)
    assert e == pytest.approx(79.0 * 1.3**4.86 * (inv.i1_bar - 3.0), rel=1e-14)
    assert e == pytest.approx(27.6, abs=0.1)


def test_term13_sums_over_stretches():
    inv, ps = invariants(T13), principal_stretches(T13)
    e = term_energy(13, 2.0, 3.0, inv, ps)
    assert e == pytest.approx(2.0 * (1.3**3 - 3.0 * math.log(1.3) - 1.0), rel=1e-14)


def test_printed_leap_energy_is_sum_of_terms():
    m = printed_model("leap", "SI_MI")
    inv = invariants(T13)
    parts = sum(term_energy(t.term_id, t.w, t.w_star, inv) for t in m.terms)
    assert energy(m, T13) == pytest.approx(parts, rel=1e-15)


def test_empty_model_and_identity():
    assert energy(ModelSpec(), T13) == 0.0
    assert energy(printed_model("turbo", "SI_PS"), DeformationState.identity()) == 0.0


def test_nonpositive_j_rejected():
    with pytest.raises(DomainError):
        term_energy(9, 1.0, 1.0, InvariantSet(3.0, 3.0, 0.0, 3.0, 3.0))


def test_exponential_overflow_names_the_term():
    with pytest.raises(SaturationError) as exc:
        energy_at(make_model([(4, 1.0, 500.0)]), 3.0, 1.0, 0.0)
    assert exc.value.term_id == 4


def test_term_validation():
    with pytest.raises(DomainError):
        Term(1, -1.0)
    with pytest.raises(DomainError):
        Term(9, 1.0, -0.1)
    with pytest.raises(DomainError):
        Term(15, 1.0)
    with pytest.raises(DomainError):
        Term(1, 1.0, 2.0)
    with pytest.raises(DomainError):
        ModelSpec((Term(1, 1.0), Term(1, 2.0)))
    assert Term(2, 1.0).w_star == 0.0 and Term(3, 1.0).w_star is None


def test_render_lists_every_active_term():
    text = printed_model("turbo", "SI_MI").render()
    assert text.startswith("psi = 936 kPa") and text.count("+") == 2
    assert ModelSpec().render() == "psi = 0"
    assert set(FORMS) == set(range(1, 15))


def test_partials_single_linear_term():
    p = energy_partials(make_model([(1, 1.0)]), T13)
    assert (p.d_i1_bar, p.d_i2_bar, p.d_j, p.d_stretch) == (1.0, 0.0, 0.0, (0.0, 0.0, 0.0))
    assert energy_partials(ModelSpec(), T13).d_j == 0.0


def _inv(i1b, i2b, j):
    return InvariantSet(0.0, 0.0, j, i1b, i2b)


@pytest.mark.parametrize("seed", range(25))
def test_partials_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, term_ids=range(1, 13), p_active=1.0)
    i1b, i2b, j = 3.0 + rng.uniform(0, 0.3), 3.0 + rng.uniform(0, 0.3), rng.uniform(0.5, 1.3)

    def psi(a, b, c):
        inv = _inv(a, b, c)
        return sum(term_energy(t.term_id, t.w, t.w_star, inv) for t in m.active())

    p = partials_from(m, _inv(i1b, i2b, j))
    h = 1e-6
    fd = (
        central_difference(lambda x: psi(x, i2b, j), i1b, h * i1b),
        central_difference(lambda x: psi(i1b, x, j), i2b, h * i2b),
        central_difference(lambda x: psi(i1b, i2b, x), j, h * j),
    )
    scale = max(1.0, max(abs(v) for v in fd))
    for a, b in zip((p.d_i1_bar, p.d_i2_bar, p.d_j), fd):
        assert abs(a - b) <= 1e-5 * max(abs(b), 1e-3 * scale)


def test_stretch_partials_printed_turbo_ps():
    m = printed_model("turbo", "SI_PS")
    state = DeformationState.tension(1.2)
    p = energy_partials(m, state)
    ps = principal_stretches(state)
    ws = next(t.w_star for t in m.terms if t.term_id == 13)
    w = next(t.w for t in m.terms if t.term_id == 13)
    for s, fp in zip(ps.as_tuple(), p.d_stretch):
        fd = central_difference(lambda x: w * (x**ws - ws * math.log(x) - 1.0), s, 1e-6 * s)
        assert fp == pytest.approx(fd, rel=1e-6, abs=1e-8)


@pytest.mark.parametrize("seed", range(40))
def test_energy_matches_matrix_oracle(seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng)
    lam, alpha, gamma = random_state(rng)
    assert energy_at(m, lam, alpha, gamma) == pytest.approx(brute_energy(m, lam, alpha, gamma), rel=1e-10, abs=1e-11)


def test_zero_weight_terms_are_inert():
    rng = np.random.default_rng(3)
    m = random_model(rng, p_active=1.0)
    zeroed = ModelSpec(tuple(Term(t.term_id, 0.0 if t.term_id % 2 else t.w, t.w_star) for t in m.terms))
    kept = ModelSpec(tuple(t for t in m.terms if t.term_id % 2 == 0))
    for state in [(1.2, 1.0, 0.0), (0.6, 1.0, 0.0), (0.8, 1.0, 0.2)]:
        assert energy_at(zeroed, *state) == energy_at(kept, *state)


def test_energy_is_linear_in_outer_weight():
    inv, ps = invariants(T13), principal_stretches(T13)
    for tid in range(1, 15):
        ws = None if tid in (1, 3, 5, 7) else 0.7
        assert term_energy(tid, 2.0, ws, inv, ps) == 2.0 * term_energy(tid, 1.0, ws, inv, ps)


def test_convex_families_nonnegative_on_grid():
    rng = np.random.default_rng(11)
    ids = [*range(1, 11), 13, 14]
    for _ in range(20):
        m = random_model(rng, term_ids=ids)
        for lam in np.linspace(0.4, 1.4, 11):
            for gamma in (0.0, 0.1, 0.3):
                assert energy_at(m, lam, 1.0, gamma) >= -1e-12


def test_removable_singularities():
    inv, ps = invariants(T13), principal_stretches(T13)
    assert term_energy(9, 5.0, 0.0, inv) == 0.0
    assert term_energy(13, 5.0, 0.0, inv, ps) == 0.0
