"""Compare the compiled row kernel with the numpy fallback.

Two measurements:

* the kernel alone on the 39 training rows and on a large row block;
* a complete two-stage fit, run in a subprocess per backend so that the
  import-time backend selection is exercised as in normal use.

Usage::

    python3 benchmarks/bench_kernels.py [--repeats 200] [--epochs 3000]
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from foamfit._core import BACKEND, py_term_stress_matrix, term_stress_matrix
from foamfit.dataproc import builtin_dataset
from foamfit.stress import shear_rows, uniaxial_rows

FIT_SNIPPET = """
import json, time
from foamfit._core import BACKEND
from foamfit.dataproc import builtin_dataset
from foamfit.training import TrainConfig, fit
data = builtin_dataset("leap")
cfg = TrainConfig("ALL", 1.0, epochs={epochs}, warm_epochs={warm})
t0 = time.perf_counter()
r = fit(cfg, data)
print(json.dumps({{"backend": BACKEND, "seconds": time.perf_counter() - t0, "terms": r.nonzero_terms}}))
"""


def training_rows():
    d = builtin_dataset("leap")
    ten, p22 = uniaxial_rows(d.tension.x)
    com, p22c = uniaxial_rows(d.compression.x)
    return np.vstack([ten, com, shear_rows(d.shear.x, d.shear_stretch), p22, p22c])


def large_rows(n):
    lam = np.linspace(0.4, 1.3, n // 2)
    gamma = np.linspace(0.0, 0.3, n - n // 2)
    return np.vstack([uniaxial_rows(lam)[0], shear_rows(gamma, 0.8)])


def time_kernel(fn, rows, ws, repeats):
    return min(timeit.repeat(lambda: fn(rows, ws), number=repeats, repeat=5)) / repeats


def time_fit(pure, epochs):
    env = dict(os.environ)
    env.pop("FOAMFIT_PURE_PYTHON", None)
    if pure:
        env["FOAMFIT_PURE_PYTHON"] = "1"
    code = FIT_SNIPPET.format(epochs=epochs, warm=epochs // 3)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=200)
    parser.add_argument("--epochs", type=int, default=3000)
    parser.add_argument("--large", type=int, default=20000, help="row count for the large block")
    args = parser.parse_args(argv)

    if BACKEND != "cython":
        print("compiled kernel not available; build with `pip install --no-build-isolation -e .`")
        return 1
    ws = np.random.default_rng(0).uniform(0.1, 2.0, 14)
    print(f"{'case':<28}{'compiled':>14}{'fallback':>14}{'speed-up':>10}")
    for name, rows, reps in (
        ("kernel, 52 training rows", training_rows(), args.repeats),
        (f"kernel, {args.large} rows", large_rows(args.large), max(1, args.repeats // 50)),
    ):
        fast = time_kernel(term_stress_matrix, rows, ws, reps)
        slow = time_kernel(py_term_stress_matrix, rows, ws, reps)
        print(f"{name:<28}{fast * 1e6:>11.1f} us{slow * 1e6:>11.1f} us{slow / fast:>9.1f}x")

    fast = time_fit(False, args.epochs)
    slow = time_fit(True, args.epochs)
    assert fast["terms"] == slow["terms"], "backends disagree on the fitted model"
    label = f"fit ALL, {args.epochs} epochs"
    print(f"{label:<28}{fast['seconds']:>12.2f} s{slow['seconds']:>12.2f} s{slow['seconds'] / fast['seconds']:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
