"""Reduction of raw instrument recordings to mean stretch-stress curves.

Units: forces in N, torques in N*mm, lengths in mm, areas in mm^2; all
stresses leave this module in kPa.  Compression is stored signed, with
``lam < 1`` and ``P11 < 0``.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DomainError
from .kinematics import Mode

__all__ = [
    "Curve",
    "FoamDataset",
    "RawRecording",
    "CyclePolicy",
    "reduce_uniaxial",
    "reduce_shear",
    "reduce",
    "split_half_cycles",
    "cycle_average",
    "zero_curve",
    "linear_stiffness",
    "energy_return",
    "builtin_dataset",
    "BUILTIN_NAMES",
    "read_curve_csv",
    "write_curve_csv",
    "read_raw_csv",
    "read_geometry",
    "load_dataset",
    "save_dataset",
]

# N/mm^2 -> kPa
MPA_TO_KPA = 1000.0
RESAMPLE_POINTS = 200
SHEAR_PRESTRETCH = 0.8
BUILTIN_NAMES = ("leap", "turbo")


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Curve:
    """Stretch (or shear strain) vs Piola stress in kPa."""

    x: np.ndarray
    y: np.ndarray
    y_std: np.ndarray | None = None

    def __post_init__(self):
        x = _frozen(self.x)
        y = _frozen(self.y)
        if x.ndim != 1 or x.shape != y.shape or x.size == 0:
            raise DomainError("curve x and y must be equal-length 1-d arrays")
        if x.size > 1:
            dx = np.diff(x)
            if not (np.all(dx > 0) or np.all(dx < 0)):
                raise DomainError("curve x must be strictly monotone")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.y_std is not None:
            s = _frozen(self.y_std)
            if s.shape != x.shape:
                raise DomainError("y_std must match x")
            object.__setattr__(self, "y_std", s)

    def __len__(self):
        return self.x.size

    def __eq__(self, other):
        if not isinstance(other, Curve):
            return NotImplemented
        same_std = (self.y_std is None and other.y_std is None) or (
            self.y_std is not None and other.y_std is not None and np.array_equal(self.y_std, other.y_std)
        )
        return np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y) and same_std

    def ascending(self):
        if self.x.size > 1 and self.x[0] > self.x[-1]:
            std = None if self.y_std is None else self.y_std[::-1]
            return Curve(self.x[::-1], self.y[::-1], std)
        return self

    def scaled(self, c):
        std = None if self.y_std is None else self.y_std * abs(c)
        return Curve(self.x, self.y * c, std)


@dataclass(frozen=True, eq=False)
class FoamDataset:
    """Mean tension, compression and shear curves for one foam.

    ``shear_stretch`` is the axial stretch at which the shear data were
    recorded; model shear stresses are evaluated there.
    """

    tension: Curve
    compression: Curve
    shear: Curve
    label: str = ""
    shear_stretch: float = 1.0

    def __eq__(self, other):
        if not isinstance(other, FoamDataset):
            return NotImplemented
        return (
            self.tension == other.tension
            and self.compression == other.compression
            and self.shear == other.shear
            and self.label == other.label
            and self.shear_stretch == other.shear_stretch
        )

    def curve(self, mode):
        return getattr(self, Mode(mode).value)


@dataclass(frozen=True, eq=False)
class RawRecording:
    """Instrument time series plus specimen geometry.

    ``signal`` is force (N) for tension/compression and torque (N*mm) for shear.
    ``displacement`` is the crosshead displacement u (mm) in tension, the
    current height h (mm) in compression and the twist angle phi (rad) in shear.
    Geometry keys: tension ``A, L``; compression ``A, H``; shear ``R, H``.
    """

    mode: Mode
    time: np.ndarray
    signal: np.ndarray
    displacement: np.ndarray
    geometry: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        for name in ("time", "signal", "displacement"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if not (self.time.shape == self.signal.shape == self.displacement.shape):
            raise DomainError("time, signal and displacement must have equal length")
        if self.time.size > 1 and np.any(np.diff(self.time) < 0):
            raise DomainError("time must be monotone")
        needed = {Mode.TENSION: ("A", "L"), Mode.COMPRESSION: ("A", "H"), Mode.SHEAR: ("R", "H")}[self.mode]
        for key in needed:
            value = self.geometry.get(key)
            if value is None or not value > 0:
                raise DomainError(f"{self.mode.value} geometry needs positive {key}, got {value!r}")


def reduce_uniaxial(rec: RawRecording):
    """Force/displacement to stretch and P11.

    The result follows the recording order, so it is generally not monotone;
    split it with :func:`split_half_cycles` before building ``Curve`` objects.
    Returns ``(lam, p11)`` arrays.
    """
    if rec.mode is Mode.TENSION:
        lam = 1.0 + rec.displacement / rec.geometry["L"]
    elif rec.mode is Mode.COMPRESSION:
        lam = rec.displacement / rec.geometry["H"]
    else:
        raise DomainError("reduce_uniaxial needs a tension or compression recording")
    p11 = rec.signal / rec.geometry["A"] * MPA_TO_KPA
    return lam, p11


def reduce_shear(rec: RawRecording):
    """Torque/angle to shear strain and P12, assuming a linear radial stress profile.

    Returns ``(gamma, p12)`` arrays.
    """
    if rec.mode is not Mode.SHEAR:
        raise DomainError("reduce_shear needs a shear recording")
    r, h = rec.geometry["R"], rec.geometry["H"]
    gamma = r / h * rec.displacement
    p12 = 2.0 / (math.pi * r**3) * rec.signal * MPA_TO_KPA
    return gamma, p12


def reduce(rec: RawRecording):
    if rec.mode is Mode.SHEAR:
        return reduce_shear(rec)
    return reduce_uniaxial(rec)


def split_half_cycles(x, y):
    """Split a back-and-forth signal into monotone segments (loading, unloading, ...).

    Repeated x values are dropped; segments shorter than two points are discarded.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = np.concatenate([[True], np.diff(x) != 0])
    x, y = x[keep], y[keep]
    if x.size < 2:
        return []
    direction = np.sign(np.diff(x))
    turns = np.nonzero(direction[1:] != direction[:-1])[0] + 1
    bounds = [0, *turns.tolist(), x.size - 1]
    curves = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        if b - a >= 1:
            curves.append(Curve(x[a : b + 1], y[a : b + 1]))
    return curves


class CyclePolicy(str, enum.Enum):
    """Which half-cycles enter the average.

    TENSION: first loading and final unloading curve.
    COMPRESSION: everything except the first loading/unloading pair.
    ALL: every half-cycle (used for shear).
    """

    TENSION = "tension"
    COMPRESSION = "compression"
    ALL = "all"


def zero_curve(curve: Curve, reference=1.0) -> Curve:
    """Shift stresses so that y(reference) == 0 exactly."""
    c = curve.ascending()
    if not (c.x[0] <= reference <= c.x[-1]):
        raise DomainError(f"reference x={reference} outside curve range [{c.x[0]}, {c.x[-1]}]")
    offset = float(np.interp(reference, c.x, c.y))
    y = curve.y - offset
    hit = curve.x == reference
    y[hit] = 0.0
    return Curve(curve.x, y, curve.y_std)


def cycle_average(curves, policy=CyclePolicy.TENSION, reference=1.0, zero=True, n_points=RESAMPLE_POINTS):
    """Average selected half-cycles on a common uniform grid.

    ``curves`` is the ordered list of half-cycles (loading, unloading, loading,
    ...).  The output grid spans the x-range shared by every selected curve and
    is ascending.  With ``zero`` the result is shifted so that ``y(reference)``
    is exactly zero.
    """
    curves = list(curves)
    if not curves:
        raise DomainError("need at least one curve")
    policy = CyclePolicy(policy)
    if policy is CyclePolicy.TENSION:
        chosen = [curves[0]] if len(curves) == 1 else [curves[0], curves[-1]]
    elif policy is CyclePolicy.COMPRESSION:
        chosen = curves[2:] if len(curves) > 2 else curves
    else:
        chosen = curves
    chosen = [c.ascending() for c in chosen]
    lo = max(c.x[0] for c in chosen)
    hi = min(c.x[-1] for c in chosen)
    if not lo < hi:
        raise DomainError(f"selected cycles do not overlap (common range [{lo}, {hi}])")
    grid = np.linspace(lo, hi, n_points)
    if zero and lo < reference < hi and not np.any(grid == reference):
        grid = np.sort(np.append(grid, reference))
    stack = np.array([np.interp(grid, c.x, c.y) for c in chosen])
    out = Curve(grid, stack.mean(axis=0))
    if zero:
        out = zero_curve(out, reference)
    return out


def linear_stiffness(curve: Curve, strain_cap=0.10, reference=1.0):
    """Zero-intercept least-squares slope of stress vs strain.

    Strain is ``x - reference`` (use ``reference=1`` for stretch data and
    ``reference=0`` for shear strain); only points with ``0 < |strain| <= cap``
    enter the fit.
    """
    eps = curve.x - reference
    mask = (np.abs(eps) > 0.0) & (np.abs(eps) <= strain_cap * (1.0 + 1e-9))
    if not np.any(mask):
        raise DomainError(f"no points with 0 < strain <= {strain_cap}")
    e = eps[mask]
    s = curve.y[mask]
    return float(np.dot(e, s) / np.dot(e, e))


def _area(curve: Curve):
    c = curve.ascending()
    return float(np.trapezoid(c.y, c.x))


def energy_return(loading: Curve, unloading: Curve):
    """Ratio of the areas under the unloading and loading curves."""
    a, b = loading.ascending(), unloading.ascending()
    if not (np.isclose(a.x[0], b.x[0]) and np.isclose(a.x[-1], b.x[-1])):
        raise DomainError("loading and unloading curves must span the same x-range")
    load = _area(loading)
    if load == 0.0:
        raise DomainError("loading curve encloses zero area")
    return abs(_area(unloading)) / abs(load)


# -- CSV and built-in data ---------------------------------------------------


def _fmt(v):
    return repr(float(v))


def write_curve_csv(path, curve: Curve):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        if curve.y_std is None:
            w.writerow(["x", "y"])
            for x, y in zip(curve.x, curve.y):
                w.writerow([_fmt(x), _fmt(y)])
        else:
            w.writerow(["x", "y", "y_std"])
            for x, y, s in zip(curve.x, curve.y, curve.y_std):
                w.writerow([_fmt(x), _fmt(y), _fmt(s)])


def _parse_curve(fh, source):
    reader = csv.reader(fh)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DomainError(f"{source}: empty file") from None
    if header[:2] != ["x", "y"] or header[2:] not in ([], ["y_std"]):
        raise DomainError(f"{source}: expected header x,y[,y_std], got {','.join(header)}")
    cols = [[] for _ in header]
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DomainError(f"{source}:{lineno}: expected {len(header)} fields")
        try:
            for c, v in zip(cols, row):
                c.append(float(v))
        except ValueError:
            raise DomainError(f"{source}:{lineno}: not a number") from None
    return Curve(cols[0], cols[1], cols[2] if len(cols) == 3 else None)


def read_curve_csv(path) -> Curve:
    path = Path(path)
    if not path.is_file():
        raise DomainError(f"no such file: {path}")
    with path.open(newline="") as fh:
        return _parse_curve(fh, path)


def read_raw_csv(path, mode, geometry) -> RawRecording:
    """Read a ``t,signal,displacement`` recording."""
    path = Path(path)
    if not path.is_file():
        raise DomainError(f"no such file: {path}")
    data = np.genfromtxt(path, delimiter=",", names=True, dtype=float)
    names = data.dtype.names or ()
    if tuple(names) != ("t", "signal", "displacement"):
        raise DomainError(f"{path}: expected header t,signal,displacement")
    data = np.atleast_1d(data)
    return RawRecording(mode, data["t"], data["signal"], data["displacement"], dict(geometry))


def read_geometry(path):
    """Parse a ``key=value`` manifest (``A=50``, ``L=20``, ...)."""
    return {k: float(v) for k, v in _read_manifest(path).items()}


def _read_manifest(path):
    path = Path(path)
    if not path.is_file():
        raise DomainError(f"no such file: {path}")
    out = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def builtin_dataset(name) -> FoamDataset:
    """Mean curves of the two bundled foams (13 points per mode).

    Shear was measured at a pre-compression of lam = 0.8, carried along as
    ``shear_stretch``.
    """
    name = str(name).lower()
    if name not in BUILTIN_NAMES:
        raise DomainError(f"unknown built-in dataset {name!r}; choose from {BUILTIN_NAMES}")
    pkg = resources.files("foamfit") / "data"
    curves = {}
    for mode in Mode:
        with (pkg / f"{name}_{mode.value}.csv").open(newline="") as fh:
            curves[mode.value] = _parse_curve(fh, f"{name}_{mode.value}.csv")
    return FoamDataset(label=name, shear_stretch=SHEAR_PRESTRETCH, **curves)


def save_dataset(dataset: FoamDataset, directory):
    """Write ``tension.csv``, ``compression.csv``, ``shear.csv`` and ``dataset.txt``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for mode in Mode:
        write_curve_csv(d / f"{mode.value}.csv", dataset.curve(mode))
    (d / "dataset.txt").write_text(
        f"label={dataset.label}\nshear_stretch={_fmt(dataset.shear_stretch)}\n"
        "tension=tension.csv\ncompression=compression.csv\nshear=shear.csv\n"
    )
    return d


def load_dataset(spec) -> FoamDataset:
    """Resolve a built-in name, a dataset directory, or a ``dataset.txt`` manifest."""
    if str(spec).lower() in BUILTIN_NAMES:
        return builtin_dataset(spec)
    path = Path(spec)
    if path.is_dir():
        path = path / "dataset.txt"
        if not path.is_file():
            base = Path(spec)
            curves = {m.value: read_curve_csv(base / f"{m.value}.csv") for m in Mode}
            return FoamDataset(label=base.name, **curves)
    manifest = _read_manifest(path)
    base = path.parent
    try:
        curves = {m.value: read_curve_csv(base / manifest[m.value]) for m in Mode}
    except KeyError as exc:
        raise DomainError(f"{path}: manifest lacks {exc.args[0]}") from None
    return FoamDataset(
        label=manifest.get("label", base.name),
        shear_stretch=float(manifest.get("shear_stretch", 1.0)),
        **curves,
    )
