"""Densities of independent sums, Gaussian smoothing, and OU evolution.

Convolutions are computed by FFT on a common uniform step with zero padding
(scipy.signal.fftconvolve in 'full' mode, so there is no circular
wrap-around), then resampled onto a fresh grid sized from the predicted
moments of the output.  OU evolution uses the exact distributional
factorization p_t X = e^{-t} X + sqrt(1 - e^{-2t}) G, reusing the affine and
smoothing primitives.
"""
from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import ndtr

from .errors import InvalidSpec, NonCenteredInput, TruncationWarning
from .functionals import GAUSSIAN_ENTROPY, entropy, fisher_information
from .grid import (DEFAULT_CONFIG, GridConfig, GridDensity, _build_density,
                   affine_transform, moments, spline_resample, trapz)


def _sample_on_step(d: GridDensity, step: float):
    """Resample a density onto a grid with the given step covering its support."""
    n = int(math.ceil((d.grid_end - d.grid_start) / step)) + 1
    start = d.grid_start
    x = start + step * np.arange(n)
    return start, spline_resample(d.x, d.values, x)


def _convolve(dA: GridDensity, dB: GridDensity, cfg: GridConfig, label: str) -> GridDensity:
    """Density of A + B for independent A, B on a fresh cfg-sized grid."""
    mA, vA = moments(dA)
    mB, vB = moments(dB)
    out_mean, out_var = mA + mB, vA + vB
    sigma = math.sqrt(out_var)
    half = cfg.half_width_sigmas * sigma
    step = 2 * half / (cfg.num_points - 1)
    startA, fA = _sample_on_step(dA, step)
    startB, fB = _sample_on_step(dB, step)
    conv = fftconvolve(fA, fB) * step
    x_conv = (startA + startB) + step * np.arange(conv.size)
    out_start = out_mean - half
    x_out = out_start + step * np.arange(cfg.num_points)
    raw = spline_resample(x_conv, conv, x_out)
    return _build_density(out_start, step, raw, label, cfg)


def sum_density(dX: GridDensity, dY: GridDensity,
                cfg: GridConfig = DEFAULT_CONFIG) -> GridDensity:
    """Density of the plain independent sum X + Y."""
    return _convolve(dX, dY, cfg, f"sum({dX.label},{dY.label})")


def scaled_sum_density(dX: GridDensity, dY: GridDensity,
                       lam: float = 1.0 / math.sqrt(2.0),
                       cfg: GridConfig = DEFAULT_CONFIG) -> GridDensity:
    """Density of lam*X + sqrt(1 - lam^2)*Y for independent X, Y."""
    if not 0.0 <= lam <= 1.0:
        raise InvalidSpec(f"lambda must lie in [0, 1], got {lam}")
    if lam == 1.0:
        return dX
    if lam == 0.0:
        return dY
    dA = affine_transform(dX, lam)
    dB = affine_transform(dY, math.sqrt(1.0 - lam * lam))
    return _convolve(dA, dB, cfg, f"scaled_sum({dX.label},{dY.label},lam={lam})")


def gaussian_smooth(d: GridDensity, v: float,
                    cfg: GridConfig = DEFAULT_CONFIG) -> GridDensity:
    """Density of X + sqrt(v) G for standard Gaussian G independent of X."""
    if v <= 0:
        raise InvalidSpec(f"smoothing variance must be positive, got {v}")
    mean, var = moments(d)
    out_var = var + v
    sigma = math.sqrt(out_var)
    half = cfg.half_width_sigmas * sigma
    step = 2 * half / (cfg.num_points - 1)
    start_in, f = _sample_on_step(d, step)
    s = math.sqrt(v)
    if s >= 5 * step:
        # pointwise-sampled kernel: trapezoid sums of a well-resolved Gaussian
        # are spectrally accurate
        m = int(math.ceil(10 * s / step))
        offs = step * np.arange(-m, m + 1)
        kernel = np.exp(-0.5 * offs * offs / v) / math.sqrt(2 * math.pi * v)
    else:
        # kernel narrower than a few cells: use bin-integrated weights so the
        # discrete kernel keeps unit mass and acts as a near-identity
        m = max(int(math.ceil(9 * s / step)) + 1, 1)
        edges = step * (np.arange(-m, m + 1 + 1) - 0.5)
        kernel = np.diff(ndtr(edges / s)) / step
    conv = fftconvolve(f, kernel) * step
    x_conv = (start_in - m * step) + step * np.arange(conv.size)
    out_start = mean - half
    x_out = out_start + step * np.arange(cfg.num_points)
    raw = spline_resample(x_conv, conv, x_out)
    return _build_density(out_start, step, raw, f"smooth({d.label},v={v})", cfg)


def ou_evolve(d: GridDensity, t: float, cfg: GridConfig = DEFAULT_CONFIG) -> GridDensity:
    """Ornstein-Uhlenbeck evolution: density of e^{-t} X + sqrt(1-e^{-2t}) G."""
    if t < 0:
        raise InvalidSpec(f"OU time must be nonnegative, got {t}")
    if t == 0.0:
        return d
    shrunk = affine_transform(d, math.exp(-t))
    return gaussian_smooth(shrunk, 1.0 - math.exp(-2.0 * t), cfg)


def de_bruijn_residual(d: GridDensity, t: float, delta: float,
                       cfg: GridConfig = DEFAULT_CONFIG) -> float:
    """|centered difference of t -> h(X + sqrt(t) G) minus J(X + sqrt(t) G)/2|.

    The two sides come from independent code paths (entropy quadrature vs
    score quadrature), so the residual is a genuine two-route check of the
    heat-flow identity.
    """
    if not 0 < delta < t / 2:
        raise InvalidSpec(f"need 0 < delta < t/2, got delta={delta}, t={t}")
    h_plus = entropy(gaussian_smooth(d, t + delta, cfg))
    h_minus = entropy(gaussian_smooth(d, t - delta, cfg))
    lhs = (h_plus - h_minus) / (2.0 * delta)
    rhs = 0.5 * fisher_information(gaussian_smooth(d, t, cfg), check_refinement=False)
    return abs(lhs - rhs)


def integrated_debruijn_entropy(d: GridDensity, s_max: float = 10.0,
                                n_steps: int = 200,
                                cfg: GridConfig = DEFAULT_CONFIG) -> float:
    """Entropy via the integrated heat-flow representation.

    h(X) = h(G) - int_0^inf [J(p_s X) - 1] ds, evaluated with trapezoid
    quadrature on a geometric s-grid (the integrand decays like e^{-2s}).
    """
    mean, var = moments(d)
    if abs(mean) > 1e-6:
        raise NonCenteredInput(f"mean {mean} is not zero within 1e-6")
    if not 0.1 <= var <= 10.0:
        raise InvalidSpec(f"variance {var} outside [0.1, 10]")
    if n_steps < 2 or s_max <= 0:
        raise InvalidSpec("need n_steps >= 2 and s_max > 0")
    s_grid = np.geomspace(1e-4, s_max, n_steps)
    vals = np.array([fisher_information(ou_evolve(d, s, cfg), check_refinement=False) - 1.0
                     for s in s_grid])
    if abs(vals[-1]) > 1e-6:
        warnings.warn(f"integrand still {vals[-1]:.2e} at s_max={s_max}",
                      TruncationWarning, stacklevel=2)
    integral = float(trapz(vals, s_grid))
    j0 = fisher_information(d, check_refinement=False) - 1.0
    integral += 0.5 * (j0 + vals[0]) * s_grid[0]
    return GAUSSIAN_ENTROPY - integral
