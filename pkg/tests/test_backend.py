import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from foamfit._core import BACKEND

ROOT = Path(__file__).resolve().parents[1]

SNIPPET = """
import json
from foamfit._core import BACKEND
from foamfit.dataproc import builtin_dataset
from foamfit.discovery import export_model
from foamfit.training import TrainConfig, fit
r = fit(TrainConfig("SI_PS", 1.0, epochs=600, warm_epochs=200), builtin_dataset("turbo"))
print(json.dumps({"backend": BACKEND, "model": export_model(r.model), "r2": r.r2}))
"""


def _run(pure):
    env = dict(os.environ)
    env.pop("FOAMFIT_PURE_PYTHON", None)
    if pure:
        env["FOAMFIT_PURE_PYTHON"] = "1"
    out = subprocess.run([sys.executable, "-c", SNIPPET], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def test_fallback_is_selected_by_environment():
    assert _run(True)["backend"] == "python"


@pytest.mark.skipif(BACKEND != "cython", reason="compiled kernel not built")
def test_backends_fit_the_same_model():
    fast, slow = _run(False), _run(True)
    assert fast["backend"] == "cython"
    assert [t["id"] for t in fast["model"]["terms"]] == [t["id"] for t in slow["model"]["terms"]]
    for a, b in zip(fast["model"]["terms"], slow["model"]["terms"]):
        assert a["w_kpa"] == pytest.approx(b["w_kpa"], rel=1e-6, abs=1e-9)
    for m in ("ten", "com", "shr"):
        assert fast["r2"][m] == pytest.approx(slow["r2"][m], abs=1e-9)


@pytest.mark.skipif(BACKEND != "cython", reason="compiled kernel not built")
def test_benchmark_script_runs():
    script = ROOT / "benchmarks" / "bench_kernels.py"
    out = subprocess.run(
        [sys.executable, str(script), "--repeats", "10", "--epochs", "300", "--large", "2000"],
        capture_output=True,
        text=True,
        check=True,
    )
    assert "speed-up" in out.stdout and "fit ALL" in out.stdout
