import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from foamfit.dataproc import Curve, FoamDataset, builtin_dataset  # noqa: E402
from foamfit.energy import make_model  # noqa: E402
from foamfit.training import predict_modes  # noqa: E402

_ACCEPTANCE = {}


@pytest.fixture
def record_criterion():
    """Store a one-line verdict per acceptance criterion for the terminal summary."""

    def record(number, passed, detail):
        _ACCEPTANCE[number] = (passed, detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")


@pytest.fixture(scope="session")
def leap():
    return builtin_dataset("leap")


@pytest.fixture(scope="session")
def turbo():
    return builtin_dataset("turbo")


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def synthetic_dataset(terms, grid_from="leap", shear_stretch=1.0, label="synthetic"):
    """Dataset whose curves are the exact stresses of ``make_model(terms)`` on a built-in grid."""
    ref = builtin_dataset(grid_from)
    base = FoamDataset(ref.tension, ref.compression, ref.shear, label, shear_stretch)
    pred = predict_modes(make_model(terms), base)
    return FoamDataset(
        Curve(ref.tension.x, pred["ten"]),
        Curve(ref.compression.x, pred["com"]),
        Curve(ref.shear.x, pred["shr"]),
        label,
        shear_stretch,
    )
