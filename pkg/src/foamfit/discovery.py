"""Experiment grid, model selection, printed reference models and model documents."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from ._core import term_stress_matrix
from .dataproc import FoamDataset
from .energy import FORMS, NO_INNER, PS_TERMS, ModelSpec, Term
from .errors import DomainError, FoamfitError, ModelFormatError, TrainingError
from .report import CONDITIONAL, CONVEX, MODES, VIOLATES, FitReport, polyconvexity_flags, r_squared
from .stress import shear_rows, uniaxial_rows
from .training import ARCHITECTURE_TERMS, Architecture, TrainConfig, predict_modes, sparsity_sweep

__all__ = [
    "FitReport",
    "r_squared",
    "polyconvexity_flags",
    "CONVEX",
    "VIOLATES",
    "CONDITIONAL",
    "GRID_ARCHITECTURES",
    "GRID_ALPHAS",
    "run_grid",
    "select_model",
    "export_model",
    "import_model",
    "save_model",
    "load_model",
    "report_rows",
    "write_report_csv",
    "read_report_csv",
    "term_contributions",
    "evaluate",
    "PRINTED",
    "PRINTED_R2",
    "printed_model",
]

GRID_ARCHITECTURES = (Architecture.SI, Architecture.SI_MI, Architecture.SI_PS)
GRID_ALPHAS = (0.0, 1.0)


# -- printed reference models --------------------------------------------------

# Coefficients as printed: ``id: w`` or ``id: (w, w*)``, kPa.
PRINTED = {
    ("leap", "SI_MI"): {1: 26.9, 9: (70.3, 1.06), 11: (79.0, 4.86)},
    ("leap", "SI_PS"): {3: 9.93, 9: (59.0, 0.481), 13: (0.286, 8.40)},
    ("turbo", "SI_MI"): {10: (936.0, 0.0615), 11: (139.0, 4.36), 12: (19.8, 1.47)},
    ("turbo", "SI_PS"): {2: (73.9, 0.147), 10: (0.00592, 6.64), 13: (0.365, 8.33)},
}

# reported goodness of fit (ten, com, shr) of the selected models
PRINTED_R2 = {
    ("leap", "SI_MI"): (0.981, 0.988, 0.995),
    ("leap", "SI_PS"): (0.992, 0.995, 0.999),
    ("turbo", "SI_MI"): (0.997, 0.991, 0.996),
    ("turbo", "SI_PS"): (0.999, 0.938, 0.984),
}


def printed_model(foam, architecture) -> ModelSpec:
    """One of the four published models, in this library's weight convention.

    The principal-stretch weights are printed in a different normalization;
    the outer weight used here is ``(w_printed * w*)^2``.
    """
    key = (str(foam).lower(), Architecture.parse(architecture).value)
    if key not in PRINTED:
        raise DomainError(f"no printed model for {key}")
    terms = []
    for tid, v in PRINTED[key].items():
        w, ws = (v, None) if not isinstance(v, tuple) else v
        if tid in PS_TERMS:
            w = (w * ws) ** 2
        terms.append(Term(tid, w, ws))
    return ModelSpec(tuple(terms), label=f"{key[0]} {key[1]} (printed)")


# -- grid ---------------------------------------------------------------------


def _grid_cell(args):
    config, data, alphas = args
    try:
        return sparsity_sweep(config, data, alphas)
    except FoamfitError as exc:
        cell = f"{data.label or 'dataset'} {config.architecture.value}"
        epoch = getattr(exc, "epoch", -1)
        raise TrainingError(epoch, f"grid cell {cell}: {exc}") from exc


def run_grid(data: FoamDataset, seed=0, config: TrainConfig | None = None, alphas=GRID_ALPHAS, workers=1):
    """The six-cell experiment: {SI, SI_MI, SI_PS} x ``alphas``.

    Cells of one architecture share their unregularized warm start.  With
    ``workers > 1`` the architectures run in separate processes; the result
    does not depend on ``workers``.
    """
    base = config or TrainConfig()
    jobs = [(replace(base, architecture=a, seed=seed), data, list(alphas)) for a in GRID_ARCHITECTURES]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_grid_cell, jobs))
    else:
        results = [_grid_cell(j) for j in jobs]
    return [r for sweep in results for r in sweep]


def _key(report: FitReport):
    min_r2 = report.min_r2 if math.isfinite(report.min_r2) else -math.inf
    return (report.nonzero_terms, -min_r2, report.alpha, report.architecture)


def select_model(reports, margin=0.02) -> FitReport:
    """Sparsest regularized report that costs at most ``margin`` in min-mode R^2.

    A report with ``alpha > 0`` is a candidate when its min-mode R^2 is within
    ``margin`` of its own architecture's ``alpha = 0`` baseline and that
    baseline is itself within ``margin`` of the best baseline across
    architectures (this keeps a family that cannot fit the data at all from
    winning on term count).  Among candidates the fewest non-zero terms win,
    then the higher min-mode R^2, then the lower alpha.  Without candidates the
    best baseline is returned with a warning.
    """
    reports = list(reports)
    if not reports:
        raise DomainError("select_model needs at least one report")
    if len(reports) == 1:
        return reports[0]
    baselines = {}
    for r in sorted(reports, key=_key):
        if r.alpha == 0.0:
            cur = baselines.get(r.architecture)
            if cur is None or r.min_r2 > cur.min_r2:
                baselines[r.architecture] = r
    best_base = max((b.min_r2 for b in baselines.values()), default=-math.inf)
    candidates = []
    for r in reports:
        if r.alpha == 0.0:
            continue
        base = baselines.get(r.architecture)
        ref = base.min_r2 if base is not None else r.min_r2
        if ref < best_base - margin:
            continue
        if r.min_r2 >= ref - margin:
            candidates.append(r)
    if candidates:
        return min(candidates, key=_key)
    pool = list(baselines.values()) or reports
    best = min(pool, key=lambda r: (-r.min_r2, r.nonzero_terms, r.architecture))
    return best.with_warning(f"no regularized model within {margin} of its baseline")


# -- model documents ----------------------------------------------------------


def export_model(model: ModelSpec, architecture=None, alpha=None, r2=None):
    """JSON-ready document with a plain-text rendering of the energy."""
    terms = []
    for t in model.terms:
        terms.append({"id": t.term_id, "form": FORMS[t.term_id], "w_kpa": t.w, "w_star": t.w_star})
    return {
        "label": model.label,
        "architecture": None if architecture is None else Architecture.parse(architecture).value,
        "alpha": None if alpha is None else float(alpha),
        "terms": terms,
        "r2": None if r2 is None else {m: float(r2[m]) for m in MODES},
        "psi": model.render(),
    }


def import_model(document) -> ModelSpec:
    """Inverse of :func:`export_model`; rejects unknown ids and negative weights."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"not valid JSON: {exc}") from None
    if not isinstance(document, dict) or not isinstance(document.get("terms"), list):
        raise ModelFormatError("model document needs a 'terms' list")
    terms = []
    for i, entry in enumerate(document["terms"]):
        try:
            tid = entry["id"]
            w = entry["w_kpa"]
            ws = entry.get("w_star")
        except (TypeError, KeyError) as exc:
            raise ModelFormatError(f"term {i}: missing field {exc}") from None
        if not isinstance(tid, int) or tid not in FORMS:
            raise ModelFormatError(f"term {i}: unknown term id {tid!r}")
        if not isinstance(w, (int, float)) or not (w >= 0.0 and math.isfinite(w)):
            raise ModelFormatError(f"term {tid}: outer weight must be a finite number >= 0")
        if ws is not None and (not isinstance(ws, (int, float)) or not (ws >= 0.0 and math.isfinite(ws))):
            raise ModelFormatError(f"term {tid}: inner weight must be a finite number >= 0")
        if tid in NO_INNER and ws not in (None, 0.0):
            raise ModelFormatError(f"term {tid} takes no inner weight")
        terms.append(Term(tid, float(w), None if ws is None else float(ws)))
    try:
        return ModelSpec(tuple(terms), str(document.get("label") or ""))
    except DomainError as exc:
        raise ModelFormatError(str(exc)) from None


def save_model(path, model: ModelSpec, architecture=None, alpha=None, r2=None):
    path = Path(path)
    path.write_text(json.dumps(export_model(model, architecture, alpha, r2), indent=2) + "\n")
    return path


def load_model(path) -> ModelSpec:
    path = Path(path)
    if not path.is_file():
        raise ModelFormatError(f"no such model file: {path}")
    return import_model(path.read_text())


# -- tabular output -----------------------------------------------------------

REPORT_COLUMNS = ("dataset", "architecture", "activated_terms", "alpha", "nonzero_terms", "r2_ten", "r2_com", "r2_shr")


def report_rows(reports, dataset=""):
    rows = []
    for r in reports:
        active = ARCHITECTURE_TERMS[Architecture.parse(r.architecture)]
        rows.append(
            {
                "dataset": dataset,
                "architecture": r.architecture,
                "activated_terms": " ".join(str(t) for t in active),
                "alpha": repr(float(r.alpha)),
                "nonzero_terms": str(r.nonzero_terms),
                "r2_ten": f"{r.r2['ten']:.3f}",
                "r2_com": f"{r.r2['com']:.3f}",
                "r2_shr": f"{r.r2['shr']:.3f}",
            }
        )
    return rows


def write_report_csv(path, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS)
        w.writeheader()
        w.writerows(rows)
    return path


def read_report_csv(path):
    path = Path(path)
    if not path.is_file():
        raise DomainError(f"no such report: {path}")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != REPORT_COLUMNS:
            raise DomainError(f"{path}: not a report CSV")
        return list(reader)


def term_contributions(model: ModelSpec, data: FoamDataset):
    """Stress carried by each active term on the dataset grids.

    Returns ``{mode: (x, {term_id: stress})}``; the per-term stresses of one
    mode sum to the model prediction.
    """
    w, ws = model.to_arrays()
    out = {}
    for mode, curve, rows in (
        ("ten", data.tension, uniaxial_rows(data.tension.x)[0]),
        ("com", data.compression, uniaxial_rows(data.compression.x)[0]),
        ("shr", data.shear, shear_rows(data.shear.x, data.shear_stretch)),
    ):
        G, _ = term_stress_matrix(rows, ws)
        out[mode] = (curve.x, {t.term_id: G[:, t.term_id - 1] * w[t.term_id - 1] for t in model.active()})
    return out


def evaluate(model: ModelSpec, data: FoamDataset):
    """Per-mode R^2 and predictions of ``model`` on ``data``."""
    pred = predict_modes(model, data)
    obs = {"ten": data.tension.y, "com": data.compression.y, "shr": data.shear.y}
    return {m: r_squared(pred[m], obs[m]) for m in MODES}, pred
