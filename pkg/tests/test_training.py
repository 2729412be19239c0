from dataclasses import replace

import numpy as np
import pytest
from conftest import synthetic_dataset

from foamfit import training
from foamfit.dataproc import Curve, FoamDataset
from foamfit.energy import ModelSpec, Term, make_model
from foamfit.errors import DomainError, NormalizationError, TrainingError
from foamfit.training import (
    Architecture,
    TrainConfig,
    fit,
    loss,
    loss_gradient,
    read_loss_trace,
    sparsity_sweep,
    write_loss_trace,
)

QUICK = dict(epochs=1500, warm_epochs=500)


def test_perfect_model_has_zero_loss():
    terms = [(13, 3.0, 4.0)]
    data = synthetic_dataset(terms)
    b = loss(make_model(terms), data, alpha=0.0)
    assert b.total == pytest.approx(0.0, abs=1e-28)


def test_empty_model_one_point_tension(leap):
    data = FoamDataset(Curve([1.3], [298.59]), leap.compression, leap.shear, "one point")
    assert loss(ModelSpec(), data).tension_term == 1.0


def test_regularization_of_a_single_weight(leap):
    m = make_model([(1, 0.25)])
    assert loss(m, leap, alpha=1.0, penalty_unit=1.0).regularization == 0.5
    assert loss(make_model([(1, 250.0)]), leap, alpha=1.0).regularization == pytest.approx(0.5, rel=1e-15)


def test_breakdown_parts_sum_to_total(leap):
    b = loss(make_model([(1, 20.0), (9, 10.0, 2.0)]), leap, alpha=0.3)
    parts = (b.tension_term, b.compression_term, b.shear_term, b.p22_penalty, b.regularization)
    assert all(p >= 0.0 for p in parts)
    assert b.total == sum(parts)


def test_all_zero_mode_rejected(leap):
    zero = Curve(leap.shear.x, np.zeros(len(leap.shear)))
    with pytest.raises(NormalizationError):
        loss(ModelSpec(), FoamDataset(leap.tension, leap.compression, zero))


def test_loss_scale_free_per_mode(leap):
    base = loss(ModelSpec(), leap)
    scaled = FoamDataset(leap.tension.scaled(7.0), leap.compression, leap.shear.scaled(0.1), "s", leap.shear_stretch)
    other = loss(ModelSpec(), scaled)
    assert other.tension_term == pytest.approx(base.tension_term, rel=1e-14)
    assert other.shear_term == pytest.approx(base.shear_term, rel=1e-14)


def test_loss_invariant_under_joint_rescaling(leap):
    m = make_model([(1, 20.0), (11, 30.0, 3.0), (13, 2.0, 5.0)])
    data = synthetic_dataset([(1, 25.0), (11, 20.0, 2.0)], shear_stretch=0.8)
    c = 3.0
    m_c = ModelSpec(tuple(Term(t.term_id, c * t.w, t.w_star) for t in m.terms))
    data_c = FoamDataset(data.tension.scaled(c), data.compression.scaled(c), data.shear.scaled(c), "c", 0.8)
    a, b = loss(m, data), loss(m_c, data_c)
    assert b.total == pytest.approx(a.total, rel=1e-12)


@pytest.mark.parametrize("seed", range(8))
def test_gradient_matches_finite_differences(seed, leap):
    rng = np.random.default_rng(seed)
    terms = []
    for tid in range(1, 15):
        w = float(rng.uniform(1.0, 20.0))
        ws = None if tid in (1, 3, 5, 7) else float(rng.uniform(0.3, 1.5))
        terms.append(Term(tid, w, ws))
    m = ModelSpec(tuple(terms))
    gw, gws = loss_gradient(m, leap, alpha=1.0)
    w, ws = m.to_arrays()

    def total(w_, ws_):
        return loss(ModelSpec.from_arrays(w_, ws_), leap, alpha=1.0).total

    for k in range(14):
        h = 1e-6 * w[k]
        up, dn = w.copy(), w.copy()
        up[k] += h
        dn[k] -= h
        fd = (total(up, ws) - total(dn, ws)) / (2 * h)
        assert gw[k] == pytest.approx(fd, rel=1e-4, abs=1e-9)
        if k + 1 in (1, 3, 5, 7):
            assert gws[k] == 0.0
            continue
        h = 1e-6 * ws[k]
        up, dn = ws.copy(), ws.copy()
        up[k] += h
        dn[k] -= h
        fd = (total(w, up) - total(w, dn)) / (2 * h)
        assert gws[k] == pytest.approx(fd, rel=1e-4, abs=1e-9)


def test_config_validation():
    with pytest.raises(DomainError):
        TrainConfig(warm_epochs=20000)
    with pytest.raises(DomainError):
        TrainConfig(alpha=-1.0)
    with pytest.raises(DomainError):
        TrainConfig(architecture="si-xx")
    assert TrainConfig(architecture="si+ps").architecture is Architecture.SI_PS
    assert TrainConfig(stage2_full=False).stage2_epochs == 10000
    assert TrainConfig().stage2_epochs == 15000


def test_architecture_masks():
    assert np.flatnonzero(TrainConfig(architecture="si").trainable()).tolist() == list(range(10))
    assert np.flatnonzero(TrainConfig(architecture="si-ps").trainable()).tolist() == [*range(10), 12, 13]
    assert TrainConfig(architecture="all").trainable().all()


def test_fit_respects_architecture_and_is_deterministic(leap):
    cfg = TrainConfig("SI", 0.5, seed=3, **QUICK)
    a, b = fit(cfg, leap), fit(cfg, leap)
    assert a == b
    assert all(t.term_id <= 10 for t in a.model.terms)
    assert a.nonzero_terms == a.model.nonzero_terms
    assert a.loss_trace[-1][0] == 1500 + 500


def test_weights_stay_nonnegative_every_step(leap, monkeypatch):
    seen = []
    step = training._adam_step

    def checked(state, gw, gws, config):
        step(state, gw, gws, config)
        seen.append(min(state.w.min(), state.ws.min()))

    monkeypatch.setattr(training, "_adam_step", checked)
    fit(TrainConfig("ALL", 1.0, epochs=400, warm_epochs=100), leap)
    assert len(seen) == 500 and min(seen) >= 0.0


def test_minibatch_path(leap):
    cfg = TrainConfig("SI_MI", 0.0, batch_size=8, epochs=200, warm_epochs=50, seed=1)
    a = fit(cfg, leap)
    assert a == fit(cfg, leap)
    assert a != fit(replace(cfg, seed=2), leap)


def test_divergence_raises_with_epoch(leap):
    bad = FoamDataset(Curve(leap.tension.x, np.full(13, np.nan)), leap.compression, leap.shear)
    with pytest.raises(TrainingError) as exc:
        fit(TrainConfig(epochs=10, warm_epochs=5), bad)
    assert exc.value.epoch == 1


def test_sweep_equals_independent_fits(leap):
    cfg = TrainConfig("SI_PS", 0.0, seed=4, **QUICK)
    sweep = sparsity_sweep(cfg, leap, [0.0, 1.0])
    assert sweep[0] == fit(cfg, leap)
    assert sweep[1] == fit(replace(cfg, alpha=1.0), leap)
    assert sparsity_sweep(cfg, leap, [0.0]) == [sweep[0]]
    with pytest.raises(DomainError):
        sparsity_sweep(cfg, leap, [1.0, 0.0])


DITHER = pytest.mark.xfail(
    strict=True,
    reason="weights bouncing off zero survive the relative pruning threshold once the largest weight shrinks",
)


@pytest.mark.parametrize(
    "terms, arch",
    [
        ([(2, 20.0, 1.0)], "SI"),
        ([(4, 20.0, 1.0)], "SI"),
        pytest.param([(13, 20.0, 2.0)], "SI_PS", marks=DITHER),
    ],
)
def test_sweep_on_synthetic_data_prunes_monotonically(terms, arch):
    alphas = [0.0, 0.1, 1.0, 10.0]
    reports = sparsity_sweep(TrainConfig(arch), synthetic_dataset(terms), alphas)
    assert [r.alpha for r in reports] == alphas
    counts = [r.nonzero_terms for r in reports]
    assert counts == sorted(counts, reverse=True)


def test_loss_trace_round_trip(tmp_path, leap):
    r = fit(TrainConfig("SI", 0.0, epochs=300, warm_epochs=100), leap)
    path = write_loss_trace(tmp_path / "trace.csv", r.loss_trace)
    assert path.read_text().splitlines()[0] == "epoch,total,tension,compression,shear,p22,reg"
    assert read_loss_trace(path) == r.loss_trace
    assert r.trace_array().shape == (4, 7)


def test_leap_si_mi_discovers_three_terms(leap):
    r = fit(TrainConfig("SI_MI", 1.0), leap)
    assert r.nonzero_terms == 3
    assert min(r.r2.values()) >= 0.97


def test_turbo_single_invariant_fails_in_tension(turbo):
    r = fit(TrainConfig("SI", 1.0), turbo)
    assert r.r2["ten"] <= 0.6


def test_principal_stretch_term_is_recovered():
    data = synthetic_dataset([(13, 2.0, 8.0)])
    r = fit(TrainConfig("SI_PS", 0.0), data)
    w, ws = r.model.to_arrays()
    assert min(r.r2.values()) >= 0.999
    # terms 13 and 14 are the same function; only their sum at a shared exponent is identifiable
    assert w[12] + w[13] == pytest.approx(2.0, rel=0.05)
    assert all(ws[k] == pytest.approx(8.0, rel=0.05) for k in (12, 13) if w[k] > 0)


@pytest.mark.xfail(
    strict=True,
    reason="a lone isochoric term has non-zero P22 in uniaxial loading, which the loss drives to zero",
)
def test_linear_term_is_recovered():
    data = synthetic_dataset([(1, 30.0)])
    r = fit(TrainConfig("SI", 0.0), data)
    w, _ = r.model.to_arrays()
    assert min(r.r2.values()) >= 0.999
    assert w[0] == pytest.approx(30.0, rel=0.05)


@pytest.mark.parametrize("foam", ["leap", "turbo"])
@pytest.mark.parametrize("arch", ["SI_MI", "SI_PS"])
def test_regularization_costs_little(foam, arch, request):
    data = request.getfixturevalue(foam)
    base, reg = sparsity_sweep(TrainConfig(arch), data, [0.0, 1.0])
    for m in ("ten", "com", "shr"):
        assert reg.r2[m] >= base.r2[m] - 0.02, (m, base.r2, reg.r2)
