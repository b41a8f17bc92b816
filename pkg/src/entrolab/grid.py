"""Uniform-grid densities, distribution constructors, moments, affine maps.

Every random variable in the package is carried by a :class:`GridDensity`:
nonnegative samples of a probability density on a uniform grid, trapezoid
mass 1, power-of-two length, tails decayed below ``tail_eps`` relative to
the peak.  All operations are pure; densities are immutable after
construction.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import make_interp_spline
from scipy.special import ndtr

from .errors import InvalidSpec, IoFailure, TailTruncation

# np.trapz was renamed in numpy 2.0
trapz = getattr(np, "trapezoid", np.trapz)

FAMILIES = ("gaussian", "laplace", "smoothed_uniform", "gaussian_mixture", "grid_file")

DEFAULT_TOL_MASS = 1e-6
DEFAULT_TAIL_EPS = 1e-12


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridConfig:
    """Grid sizing policy: the grid spans mean +- half_width_sigmas * std."""

    num_points: int = 4096
    half_width_sigmas: float = 20.0
    tol_mass: float = DEFAULT_TOL_MASS
    tail_eps: float = DEFAULT_TAIL_EPS

    def __post_init__(self) -> None:
        if self.num_points < 16 or not _is_power_of_two(self.num_points):
            raise InvalidSpec(f"num_points must be a power of two >= 16, got {self.num_points}")
        if self.half_width_sigmas < 6:
            raise InvalidSpec(f"half_width_sigmas must be >= 6, got {self.half_width_sigmas}")
        if self.tol_mass <= 0 or self.tail_eps <= 0:
            raise InvalidSpec("tol_mass and tail_eps must be positive")


DEFAULT_CONFIG = GridConfig()


@dataclass(frozen=True)
class GridDensity:
    """A nonnegative, unit-mass density sampled on a uniform grid."""

    grid_start: float
    grid_step: float
    values: np.ndarray
    label: str = ""
    tol_mass: float = DEFAULT_TOL_MASS
    tail_eps: float = DEFAULT_TAIL_EPS

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", vals)
        vals.setflags(write=False)
        n = vals.size
        if n < 16 or not _is_power_of_two(n):
            raise InvalidSpec(f"density length must be a power of two >= 16, got {n}")
        if self.grid_step <= 0:
            raise InvalidSpec("grid_step must be positive")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise InvalidSpec("density values must be finite and nonnegative")
        mass = trapz(vals, dx=self.grid_step)
        if abs(mass - 1.0) > self.tol_mass:
            raise InvalidSpec(f"trapezoid mass {mass} outside 1 +- {self.tol_mass}")
        peak = vals.max()
        if vals[0] > self.tail_eps * peak or vals[-1] > self.tail_eps * peak:
            raise TailTruncation(
                f"boundary values ({vals[0]:.3e}, {vals[-1]:.3e}) exceed "
                f"{self.tail_eps:.1e} of the peak {peak:.3e}; widen the grid"
            )

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return self.grid_start + self.grid_step * np.arange(self.n)

    @property
    def grid_end(self) -> float:
        return self.grid_start + self.grid_step * (self.n - 1)

    def mass(self) -> float:
        return float(trapz(self.values, dx=self.grid_step))


@dataclass(frozen=True)
class DistributionSpec:
    """Declarative description of a distribution: family name plus parameters."""

    family: str
    params: dict = field(default_factory=dict)
    label: str = ""

    _ALLOWED_KEYS = {
        "gaussian": frozenset({"mean", "var"}),
        "laplace": frozenset({"mean", "scale"}),
        "smoothed_uniform": frozenset({"a", "b", "smooth_var"}),
        "gaussian_mixture": frozenset({"weights", "means", "vars"}),
        "grid_file": frozenset({"path"}),
    }

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise InvalidSpec(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        p = self.params
        unknown = set(p) - self._ALLOWED_KEYS[self.family]
        if unknown:
            raise InvalidSpec(f"unknown parameter(s) {sorted(unknown)} for "
                              f"family {self.family!r}")
        if self.family == "gaussian":
            if p.get("var", 1.0) <= 0:
                raise InvalidSpec("gaussian variance must be positive")
        elif self.family == "laplace":
            if p.get("scale", 1.0) <= 0:
                raise InvalidSpec("laplace scale must be positive")
        elif self.family == "smoothed_uniform":
            if "a" not in p or "b" not in p or p["a"] >= p["b"]:
                raise InvalidSpec("smoothed_uniform requires endpoints a < b")
            if p.get("smooth_var", 0.0) <= 0:
                raise InvalidSpec("smoothed_uniform requires smooth_var > 0 "
                                  "(a raw uniform has infinite Fisher information)")
        elif self.family == "gaussian_mixture":
            w = np.asarray(p.get("weights", ()), dtype=float)
            m = np.asarray(p.get("means", ()), dtype=float)
            v = np.asarray(p.get("vars", ()), dtype=float)
            if w.size == 0 or w.size != m.size or w.size != v.size:
                raise InvalidSpec("gaussian_mixture needs equal-length weights/means/vars")
            if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
                raise InvalidSpec("mixture weights must be positive and sum to 1")
            if np.any(v <= 0):
                raise InvalidSpec("mixture variances must be positive")
        elif self.family == "grid_file":
            if "path" not in p:
                raise InvalidSpec("grid_file requires a 'path' parameter")
        if not self.label:
            object.__setattr__(self, "label", _default_label(self.family, p))

    def to_json(self) -> str:
        return json.dumps({"family": self.family, "params": self.params, "label": self.label},
                          sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DistributionSpec":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidSpec(f"malformed spec JSON: {exc}") from exc
        if not isinstance(obj, dict) or "family" not in obj:
            raise InvalidSpec("spec JSON must be an object with a 'family' key")
        return cls(family=obj["family"], params=obj.get("params", {}),
                   label=obj.get("label", ""))

    @classmethod
    def from_file(cls, path) -> "DistributionSpec":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise IoFailure(f"cannot read spec file {path}: {exc}") from exc
        return cls.from_json(text)


def _default_label(family: str, params: dict) -> str:
    items = ",".join(f"{k}={params[k]}" for k in sorted(params))
    return f"{family}({items})"


def digest_of(*labeled) -> str:
    """Short stable hash of labels/parameters, for report provenance."""
    h = hashlib.sha256()
    for item in labeled:
        h.update(repr(item).encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()[:12]


# ---------------------------------------------------------------------------
# analytic family evaluation


def _gaussian_pdf(x, mean, var):
    return np.exp(-0.5 * (x - mean) ** 2 / var) / math.sqrt(2 * math.pi * var)


def _family_moments(spec: DistributionSpec):
    """Exact (analytic) mean and variance used for grid sizing."""
    p = spec.params
    if spec.family == "gaussian":
        return p.get("mean", 0.0), p.get("var", 1.0)
    if spec.family == "laplace":
        b = p.get("scale", 1.0)
        return p.get("mean", 0.0), 2.0 * b * b
    if spec.family == "smoothed_uniform":
        a, b = p["a"], p["b"]
        return 0.5 * (a + b), (b - a) ** 2 / 12.0 + p["smooth_var"]
    if spec.family == "gaussian_mixture":
        w = np.asarray(p["weights"], dtype=float)
        m = np.asarray(p["means"], dtype=float)
        v = np.asarray(p["vars"], dtype=float)
        mean = float(np.dot(w, m))
        var = float(np.dot(w, v + m * m) - mean * mean)
        return mean, var
    raise InvalidSpec(f"no analytic moments for family {spec.family!r}")


def _family_pdf(spec: DistributionSpec, x: np.ndarray) -> np.ndarray:
    p = spec.params
    if spec.family == "gaussian":
        return _gaussian_pdf(x, p.get("mean", 0.0), p.get("var", 1.0))
    if spec.family == "laplace":
        b = p.get("scale", 1.0)
        return np.exp(-np.abs(x - p.get("mean", 0.0)) / b) / (2.0 * b)
    if spec.family == "smoothed_uniform":
        a, b, sv = p["a"], p["b"], p["smooth_var"]
        s = math.sqrt(sv)
        return (ndtr((x - a) / s) - ndtr((x - b) / s)) / (b - a)
    if spec.family == "gaussian_mixture":
        w = np.asarray(p["weights"], dtype=float)
        m = np.asarray(p["means"], dtype=float)
        v = np.asarray(p["vars"], dtype=float)
        out = np.zeros_like(x)
        for wi, mi, vi in zip(w, m, v):
            out += wi * _gaussian_pdf(x, mi, vi)
        return out
    raise InvalidSpec(f"cannot evaluate family {spec.family!r} pointwise")


def _load_grid_file(path):
    try:
        data = np.loadtxt(path, delimiter=",", dtype=np.float64)
    except OSError as exc:
        raise IoFailure(f"cannot read grid file {path}: {exc}") from exc
    except ValueError as exc:
        raise InvalidSpec(f"grid file {path} is not two-column numeric CSV: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 8:
        raise InvalidSpec(f"grid file {path} must have two columns and >= 8 rows")
    x, f = data[:, 0], data[:, 1]
    dx = np.diff(x)
    if np.any(dx <= 0) or not np.allclose(dx, dx[0], rtol=1e-8):
        raise InvalidSpec(f"grid file {path} abscissae must be strictly increasing and uniform")
    if np.any(f < 0):
        raise InvalidSpec(f"grid file {path} density values must be nonnegative")
    f = f / trapz(f, x)
    return x, f


# ---------------------------------------------------------------------------
# resampling


def spline_resample(x_src: np.ndarray, y_src: np.ndarray, x_new: np.ndarray,
                    clip_nonneg: bool = True) -> np.ndarray:
    """Quintic-spline evaluation of (x_src, y_src) at x_new; zero outside."""
    out = np.zeros_like(x_new, dtype=np.float64)
    inside = (x_new >= x_src[0]) & (x_new <= x_src[-1])
    if inside.any():
        spl = make_interp_spline(x_src, y_src, k=5)
        out[inside] = spl(x_new[inside])
    if clip_nonneg:
        np.maximum(out, 0.0, out=out)
    return out


def _build_density(grid_start: float, grid_step: float, raw: np.ndarray,
                   label: str, cfg: GridConfig) -> GridDensity:
    """Normalize raw samples and construct a validated GridDensity."""
    raw = np.maximum(np.asarray(raw, dtype=np.float64), 0.0)
    mass = trapz(raw, dx=grid_step)
    if mass <= 0:
        raise InvalidSpec("density has zero mass on the grid")
    return GridDensity(grid_start=grid_start, grid_step=grid_step, values=raw / mass,
                       label=label, tol_mass=cfg.tol_mass, tail_eps=cfg.tail_eps)


# ---------------------------------------------------------------------------
# operations


def materialize(spec: DistributionSpec, cfg: GridConfig = DEFAULT_CONFIG) -> GridDensity:
    """Evaluate a distribution spec on a fresh grid sized from its moments."""
    if spec.family == "grid_file":
        x_src, f_src = _load_grid_file(spec.params["path"])
        mean = float(trapz(x_src * f_src, x_src))
        var = float(trapz((x_src - mean) ** 2 * f_src, x_src))
    else:
        mean, var = _family_moments(spec)
    sigma = math.sqrt(var)
    half = cfg.half_width_sigmas * sigma
    start = mean - half
    step = 2 * half / (cfg.num_points - 1)
    x = start + step * np.arange(cfg.num_points)
    if spec.family == "grid_file":
        f = spline_resample(x_src, f_src, x)
    else:
        f = _family_pdf(spec, x)
    return _build_density(start, step, f, spec.label, cfg)


def moments(d: GridDensity) -> tuple[float, float]:
    """Trapezoid-rule mean and (central) variance."""
    x = d.x
    mean = float(trapz(x * d.values, dx=d.grid_step))
    var = float(trapz((x - mean) ** 2 * d.values, dx=d.grid_step))
    return mean, var


def affine_transform(d: GridDensity, a: float, b: float = 0.0) -> GridDensity:
    """Density of a*X + b.

    The affine image of a uniform grid is a uniform grid, so the transform is
    exact: no interpolation, values scaled by 1/|a|, grid reversed when a < 0.
    """
    if a == 0:
        raise InvalidSpec("affine_transform requires a != 0")
    if a > 0:
        new_start = a * d.grid_start + b
        vals = d.values / a
    else:
        new_start = a * d.grid_end + b
        vals = d.values[::-1] / (-a)
    return GridDensity(grid_start=new_start, grid_step=abs(a) * d.grid_step,
                       values=vals.copy(), label=f"affine({d.label},a={a},b={b})",
                       tol_mass=d.tol_mass, tail_eps=d.tail_eps)


def center(d: GridDensity) -> GridDensity:
    """Shift a density to zero mean (exact grid translation)."""
    mean, _ = moments(d)
    if mean == 0.0:
        return d
    return affine_transform(d, 1.0, -mean)
