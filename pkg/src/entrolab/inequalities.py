"""Report-producing verifiers for the entropy/Fisher inequality catalog.

Each check recomputes every functional it needs at report time (reports are
self-contained evidence) and returns InequalityReport records.  Identities
involving conditional expectations are verified by tensor-product trapezoid
quadrature on a sub-sampled product grid, restricted to the product of the
score support masks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .convolution import scaled_sum_density, sum_density
from .errors import (DegenerateDenominator, EntrolabError, NonCenteredInput,
                     PreconditionViolation)
from .functionals import UNDERFLOW_FLOOR, fisher_information, entropy, score
from .grid import (DEFAULT_CONFIG, GridConfig, GridDensity, digest_of,
                   moments, spline_resample)
from .inequality_report import InequalityReport, make_report
from .poincare import SolverConfig, DEFAULT_SOLVER, restricted_poincare

SQRT2 = math.sqrt(2.0)
QUAD_POINTS = 1024

# fixed catalog of test functions for the universally-quantified projection
# identity: spot checks on these render the "for any h1, h2" claim testable
H_CATALOG = ("negation", "cubic_clipped", "zero", "projection")


@dataclass(frozen=True)
class JumpQuantities:
    """Fisher/variance diagnostics entering the entropy-jump machinery."""

    J1: float            # (J(X) + J(Y)) / 2
    J2: float            # J((X + Y)/sqrt(2))
    sigma_sq: float      # (Var X + Var Y) / 2
    A: float
    A_prime: float
    lambda_proj: float   # A' / A


def _require_zero_mean(*ds: GridDensity) -> None:
    for d in ds:
        mean, _ = moments(d)
        if abs(mean) > 1e-6:
            raise NonCenteredInput(f"density {d.label!r} has mean {mean}, expected 0")


def _quad_axis(d: GridDensity, n: int):
    """Sub-sampled (x, f, weights, rho) with weights zeroed off the mask.

    The score is differenced at the native grid resolution and then sampled
    at the quadrature nodes; re-differencing the coarsened density loses an
    order of magnitude near kinks (Laplace) and steep shoulders.
    """
    s = score(d)
    rho_full = np.where(s.support_mask, s.values, 0.0)
    if d.n <= n:
        x, f, rho = d.x, d.values.copy(), rho_full
        mask = s.support_mask.copy()
    else:
        x = np.linspace(d.grid_start, d.grid_end, n)
        f = spline_resample(d.x, d.values, x)
        rho = np.interp(x, d.x, rho_full)
        mask = np.interp(x, d.x, s.support_mask.astype(float)) > 0.999
    step = x[1] - x[0]
    w = f * step
    w[0] *= 0.5
    w[-1] *= 0.5
    w[~mask] = 0.0
    return x, f, w, rho


class _PairContext:
    """Shared quadrature data for a zero-mean independent pair (X, Y)."""

    def __init__(self, dX: GridDensity, dY: GridDensity,
                 cfg: GridConfig = DEFAULT_CONFIG, n_quad: int = QUAD_POINTS):
        _require_zero_mean(dX, dY)
        self.dX, self.dY, self.cfg = dX, dY, cfg
        self.vX = moments(dX)[1]
        self.vY = moments(dY)[1]
        self.JX = fisher_information(dX, check_refinement=False)
        self.JY = fisher_information(dY, check_refinement=False)
        self.dS = sum_density(dX, dY, cfg)
        self.JS = fisher_information(self.dS, check_refinement=False)
        sS = score(self.dS)
        self.xS, self.rhoS = sS.x, sS.values
        self.xX, self.fX, self.wX, self.rhoX = _quad_axis(dX, n_quad)
        self.xY, self.fY, self.wY, self.rhoY = _quad_axis(dY, n_quad)
        # F[i, j] = f(x_i + y_j) with f = 2 rho_{X+Y}
        s = self.xX[:, None] + self.xY[None, :]
        self.F = 2.0 * np.interp(s, self.xS, self.rhoS, left=0.0, right=0.0)
        self.g1 = self.F @ self.wY          # g1(u) = E[f(u + Y)]
        self.g2 = self.wX @ self.F          # g2(v) = E[f(X + v)]
        self.digest = digest_of(dX.label, dY.label)

    def e2(self, vals: np.ndarray) -> float:
        """E[vals(X, Y)] over the product quadrature."""
        return float(self.wX @ vals @ self.wY)

    def catalog(self, which: str, axis: str) -> np.ndarray:
        x = self.xX if axis == "x" else self.xY
        if which == "negation":
            return -x
        if which == "cubic_clipped":
            return np.clip(x, -5.0, 5.0) ** 3
        if which == "zero":
            return np.zeros_like(x)
        if which == "projection":
            return self.g1 if axis == "x" else self.g2
        raise PreconditionViolation(f"unknown catalog function {which!r}; "
                                    f"expected one of {H_CATALOG}")


def _max_rstar(dX: GridDensity, dY: GridDensity, solver: SolverConfig):
    return max(restricted_poincare(dX, solver).value,
               restricted_poincare(dY, solver).value)


def _validate_R(R: float, floor: float) -> None:
    if R < floor * (1.0 - 0.01):
        raise PreconditionViolation(
            f"supplied R={R} is below the computed Poincare maximum {floor} by more than 1%")


# ---------------------------------------------------------------------------
# entropy power and entropy jump inequalities


def check_epi(dX: GridDensity, dY: GridDensity,
              cfg: GridConfig = DEFAULT_CONFIG) -> InequalityReport:
    """Entropy power inequality: e^{2h(X+Y)} >= e^{2h(X)} + e^{2h(Y)}."""
    lhs = math.exp(2 * entropy(dX)) + math.exp(2 * entropy(dY))
    rhs = math.exp(2 * entropy(sum_density(dX, dY, cfg)))
    return make_report("epi", lhs, rhs, tolerance=1e-6 * rhs, kind="le",
                       inputs_digest=digest_of(dX.label, dY.label))


def check_eji(dX: GridDensity, dY: GridDensity,
              cfg: GridConfig = DEFAULT_CONFIG) -> InequalityReport:
    """Entropy jump inequality: h((X+Y)/sqrt2) >= (h(X) + h(Y))/2."""
    lhs = entropy(scaled_sum_density(dX, dY, 1 / SQRT2, cfg))
    rhs = 0.5 * (entropy(dX) + entropy(dY))
    return make_report("eji", lhs, rhs, tolerance=1e-6, kind="ge",
                       inputs_digest=digest_of(dX.label, dY.label))


# ---------------------------------------------------------------------------
# Fisher-information convolution bounds


def check_fisher_sandwich(dX: GridDensity, dY: GridDensity, R: float,
                          cfg: GridConfig = DEFAULT_CONFIG,
                          solver: SolverConfig = DEFAULT_SOLVER):
    """Two-sided bound on J1 - J2 from the Poincare constant.

    (sigma^2 J1 - 1)/(sigma^2 + 2R) <= J1 - J2 <= (sigma^2 J1 - 1)/sigma^2.
    """
    _require_zero_mean(dX, dY)
    _validate_R(R, _max_rstar(dX, dY, solver))
    J1 = 0.5 * (fisher_information(dX, check_refinement=False)
                + fisher_information(dY, check_refinement=False))
    J2 = fisher_information(scaled_sum_density(dX, dY, 1 / SQRT2, cfg),
                            check_refinement=False)
    sig2 = 0.5 * (moments(dX)[1] + moments(dY)[1])
    gap = J1 - J2
    tol = 1e-4 * abs(J1)
    dig = digest_of(dX.label, dY.label, R)
    lower = make_report("fisher-sandwich-lower", (sig2 * J1 - 1) / (sig2 + 2 * R), gap,
                        tolerance=tol, kind="le", inputs_digest=dig)
    upper = make_report("fisher-sandwich-upper", gap, (sig2 * J1 - 1) / sig2,
                        tolerance=tol, kind="le", inputs_digest=dig)
    return lower, upper


def check_iid_fisher(d: GridDensity, Rstar: float,
                     cfg: GridConfig = DEFAULT_CONFIG,
                     solver: SolverConfig = DEFAULT_SOLVER) -> InequalityReport:
    """Quoted i.i.d. bound J((X1+X2)/sqrt2) <= 2R*/(sigma^2+2R*) J(X1).

    Informational: at the standard Gaussian the stated bound reads J <= 1/2
    against the true J = 1, so the quoted hypothesis set appears narrower
    than advertised; the report records the quantities without gating.
    """
    _require_zero_mean(d)
    _validate_R(Rstar, restricted_poincare(d, solver).value)
    sig2 = moments(d)[1]
    lhs = fisher_information(scaled_sum_density(d, d, 1 / SQRT2, cfg),
                             check_refinement=False)
    rhs = 2 * Rstar / (sig2 + 2 * Rstar) * fisher_information(d, check_refinement=False)
    return make_report("iid-fisher[informational]", lhs, rhs,
                       tolerance=1e-4 * abs(rhs), kind="le",
                       inputs_digest=digest_of(d.label, Rstar), informational=True)


# ---------------------------------------------------------------------------
# entropy jump lower bounds


def entropy_jump_coefficient(var_x: float, var_y: float, R: float) -> float:
    """c = min(a,1)/(min(a,1)+2R) with a = min(Var X, Var Y)."""
    a = min(var_x, var_y)
    return min(a, 1.0) / (min(a, 1.0) + 2.0 * R)


def check_entropy_jump(dX: GridDensity, dY: GridDensity, R: float,
                       cfg: GridConfig = DEFAULT_CONFIG,
                       solver: SolverConfig = DEFAULT_SOLVER) -> InequalityReport:
    """Jump lower bound: jump >= c * [Gaussian entropy at mean variance - avg h]."""
    _require_zero_mean(dX, dY)
    _validate_R(R, max(_max_rstar(dX, dY, solver), 0.5))
    vX, vY = moments(dX)[1], moments(dY)[1]
    hX, hY = entropy(dX), entropy(dY)
    c = entropy_jump_coefficient(vX, vY, R)
    deficit = 0.5 * math.log(2 * math.pi * math.e * 0.5 * (vX + vY)) - 0.5 * (hX + hY)
    lhs = c * deficit
    rhs = entropy(scaled_sum_density(dX, dY, 1 / SQRT2, cfg)) - 0.5 * (hX + hY)
    return make_report("entropy-jump", lhs, rhs, tolerance=1e-5, kind="le",
                       inputs_digest=digest_of(dX.label, dY.label, R))


def check_iid_jump_ball(d: GridDensity, R: float,
                        cfg: GridConfig = DEFAULT_CONFIG) -> InequalityReport:
    """Spectral-gap i.i.d. jump: h((X+Y)/sqrt2) - h(X) >= R/(2+2R) [h(G) - h(X)].

    Here R is the spectral-gap constant of the classical (mean-constraint
    only) Poincare inequality, i.e. the reciprocal of the solver value with
    the derivative constraint disabled.  Requires unit variance.
    """
    var = moments(d)[1]
    if abs(var - 1.0) > 1e-4:
        raise PreconditionViolation(f"variance {var} must be 1 within 1e-4")
    hX = entropy(d)
    lhs = R / (2.0 + 2.0 * R) * (0.5 * math.log(2 * math.pi * math.e) - hX)
    rhs = entropy(scaled_sum_density(d, d, 1 / SQRT2, cfg)) - hX
    return make_report("iid-jump-ball", lhs, rhs, tolerance=1e-5, kind="le",
                       inputs_digest=digest_of(d.label, R))


# ---------------------------------------------------------------------------
# score-projection identities


def check_score_projection(dX: GridDensity, dY: GridDensity,
                           cfg: GridConfig = DEFAULT_CONFIG,
                           n_quad: int = QUAD_POINTS):
    """Conditional-expectation form of the sum score, and the Fisher gap.

    (i)  sup over the bulk of |rho_{X+Y}(x) - E[rho_X(X) | X+Y = x]|, the
         conditional expectation evaluated by direct quadrature against
         f_X f_Y and the score by finite differences: two independent paths.
    (ii) (J(X)+J(Y))/2 - J((X+Y)/sqrt2) = 2 E[rho_{X+Y} - (rho_X+rho_Y)/2]^2.
    """
    ctx = _PairContext(dX, dY, cfg, n_quad)
    # (i): numerator int rho_X(u) f_X(u) f_Y(x-u) du on the sum grid.
    # f_Y is interpolated in log space: its tails are locally exponential and
    # linear interpolation of the raw values dominates the error budget there.
    sX = score(dX)
    u, fXu, rhoXu = dX.x, dX.values, np.where(sX.support_mask, sX.values, 0.0)
    fS = ctx.dS.values
    bulk = fS >= 1e-6 * fS.max()
    xb = ctx.dS.x[bulk]
    with np.errstate(divide="ignore"):
        log_fY = np.log(np.maximum(dY.values, UNDERFLOW_FLOOR))
    fY_at = np.exp(np.interp(xb[:, None] - u[None, :], dY.x, log_fY,
                             left=-750.0, right=-750.0))
    wu = fXu * rhoXu * dX.grid_step
    wu[0] *= 0.5
    wu[-1] *= 0.5
    numer = fY_at @ wu
    cond = numer / fS[bulk]
    sup_err = float(np.max(np.abs(ctx.rhoS[bulk] - cond)))
    rep_i = make_report("score-projection-sup", sup_err, 0.0, tolerance=1e-3,
                        kind="eq", inputs_digest=ctx.digest)
    # (ii): Fisher gap vs projection residual.  J1 uses the same quadrature
    # axes as the 2-D integral so that finite-difference score errors (the
    # Laplace kink cell in particular) cancel between the two sides; J2 is an
    # independent full-resolution path through the scaled-sum density.
    J1 = 0.5 * (float(ctx.wX @ ctx.rhoX**2) + float(ctx.wY @ ctx.rhoY**2))
    J2 = fisher_information(scaled_sum_density(dX, dY, 1 / SQRT2, cfg),
                            check_refinement=False)
    resid = ctx.F / 2.0 - 0.5 * (ctx.rhoX[:, None] + ctx.rhoY[None, :])
    rhs = 2.0 * ctx.e2(resid * resid)
    lhs = J1 - J2
    rep_ii = make_report("fisher-gap-identity", lhs, rhs,
                         tolerance=max(1e-3 * abs(lhs), 1e-6), kind="eq",
                         inputs_digest=ctx.digest)
    return rep_i, rep_ii


def check_projection_pythagoras(dX: GridDensity, dY: GridDensity,
                                h1_id: str = "negation", h2_id: str = "negation",
                                cfg: GridConfig = DEFAULT_CONFIG,
                                n_quad: int = QUAD_POINTS) -> InequalityReport:
    """Pythagoras for the additive projection of f = 2 rho_{X+Y}.

    E[f-h1-h2]^2 = E[f-g1-g2]^2 + E[g1-h1]^2 + E[g2-h2]^2 for any h1, h2.
    """
    ctx = _PairContext(dX, dY, cfg, n_quad)
    h1 = ctx.catalog(h1_id, "x")
    h2 = ctx.catalog(h2_id, "y")
    lhs = ctx.e2((ctx.F - h1[:, None] - h2[None, :]) ** 2)
    cross = ctx.e2((ctx.F - ctx.g1[:, None] - ctx.g2[None, :]) ** 2)
    rhs = (cross + float(ctx.wX @ (ctx.g1 - h1) ** 2)
           + float(ctx.wY @ (ctx.g2 - h2) ** 2))
    tol = 1e-3 * max(abs(lhs), abs(rhs)) + 1e-9
    return make_report(f"projection-pythagoras[{h1_id},{h2_id}]", lhs, rhs,
                       tolerance=tol, kind="eq", inputs_digest=ctx.digest)


def check_compute_identities(dX: GridDensity, dY: GridDensity,
                             cfg: GridConfig = DEFAULT_CONFIG,
                             n_quad: int = QUAD_POINTS):
    """Four score-calculus identities for independent zero-mean X, Y."""
    ctx = _PairContext(dX, dY, cfg, n_quad)
    sX = score(dX)
    rhoX = np.where(sX.support_mask, sX.values, 0.0)
    wXfull = dX.values * dX.grid_step
    wXfull[0] *= 0.5
    wXfull[-1] *= 0.5
    x = dX.x
    reports = []

    def tol(rhs):
        return 1e-3 * (1.0 + abs(rhs))

    lhs = float(wXfull @ (x * rhoX))
    reports.append(make_report("identity-stein", lhs, -1.0, tolerance=tol(-1.0),
                               kind="eq", inputs_digest=ctx.digest))
    lhs = ctx.e2((ctx.F / 2.0) * ctx.rhoX[:, None])
    reports.append(make_report("identity-score-cross", lhs, ctx.JS,
                               tolerance=tol(ctx.JS), kind="eq",
                               inputs_digest=ctx.digest))
    lhs = float(wXfull @ (x + rhoX) ** 2)
    e_x2 = float(wXfull @ (x * x))
    rhs = ctx.JX - 2.0 + e_x2
    reports.append(make_report("identity-shifted-square", lhs, rhs,
                               tolerance=tol(rhs), kind="eq",
                               inputs_digest=ctx.digest))
    lhs = max(abs(float(wXfull @ rhoX)), abs(float(ctx.wX @ ctx.g1)))
    reports.append(make_report("identity-zero-mean-scores", lhs, 0.0,
                               tolerance=1e-3, kind="eq",
                               inputs_digest=ctx.digest))
    return reports


def check_poincare_lower_bound(dX: GridDensity, dY: GridDensity,
                               beta: float | None = None,
                               cfg: GridConfig = DEFAULT_CONFIG,
                               solver: SolverConfig = DEFAULT_SOLVER,
                               n_quad: int = QUAD_POINTS) -> InequalityReport:
    """Poincare lower bound on the projection residual (beta-weighted form)."""
    ctx = _PairContext(dX, dY, cfg, n_quad)
    rX = restricted_poincare(dX, solver).value
    rY = restricted_poincare(dY, solver).value
    if beta is None:
        beta = rX / (rX + rY)      # the sharpest choice
    if not 0.0 <= beta <= 1.0:
        raise PreconditionViolation(f"beta must lie in [0, 1], got {beta}")
    mu = -2.0 * ctx.JS
    jbar = (1.0 - beta) * ctx.JX + beta * ctx.JY
    lhs = ctx.e2((ctx.F + ctx.xX[:, None] + ctx.xY[None, :]) ** 2)
    term_x = float(ctx.wX @ (ctx.g1 - mu * ctx.xX) ** 2)
    term_y = float(ctx.wY @ (ctx.g2 - mu * ctx.xY) ** 2)
    rhs = (beta / rX * term_x + (1.0 - beta) / rY * term_y) / jbar
    tol = 1e-3 * max(abs(lhs), abs(rhs)) + 1e-9
    return make_report(f"poincare-lower-bound[beta={beta:.4f}]", lhs, rhs,
                       tolerance=tol, kind="ge",
                       inputs_digest=digest_of(ctx.digest, beta))


def ab_diagnostics(dX: GridDensity, dY: GridDensity,
                   R: float | None = None,
                   cfg: GridConfig = DEFAULT_CONFIG,
                   solver: SolverConfig = DEFAULT_SOLVER) -> JumpQuantities:
    """The A / A' projection diagnostics behind the Fisher convolution bound.

    A' = J2 - 2 + sigma^2, A = J1 - 2 + sigma^2, lambda = A'/A.  When
    sigma^2 = 1 the chain A' <= 2R/(1+2R) A is asserted with R at least the
    solver maximum of the two restricted constants.
    """
    _require_zero_mean(dX, dY)
    vX, vY = moments(dX)[1], moments(dY)[1]
    sig2 = 0.5 * (vX + vY)
    J1 = 0.5 * (fisher_information(dX, check_refinement=False)
                + fisher_information(dY, check_refinement=False))
    scaled = scaled_sum_density(dX, dY, 1 / SQRT2, cfg)
    J2 = fisher_information(scaled, check_refinement=False)
    var_scaled = moments(scaled)[1]
    if J2 * var_scaled < 1.0 - 1e-6:
        raise EntrolabError(f"Cramer-Rao violated for the scaled sum: "
                            f"J2*var = {J2 * var_scaled}")
    A_prime = J2 - 2.0 + sig2
    A = J1 - 2.0 + sig2
    # 1e-8 rather than machine zero: J1 carries ~5e-10 of quadrature error
    # even for the exact Gaussian equality case, which must be flagged
    if abs(A) < 1e-8:
        raise DegenerateDenominator(f"A = {A} vanishes (equality case)")
    lam = A_prime / A
    if abs(sig2 - 1.0) <= 1e-4:
        if A < A_prime - 1e-8:
            raise EntrolabError(f"A' = {A_prime} exceeds A = {A} at unit variance")
        R_used = R if R is not None else max(_max_rstar(dX, dY, solver), 0.5)
        bound = 2.0 * R_used / (1.0 + 2.0 * R_used) * A
        if A_prime > bound + 1e-3 * abs(A) + 1e-8:
            raise EntrolabError(
                f"A' = {A_prime} violates the 2R/(1+2R) bound {bound} (R = {R_used})")
    return JumpQuantities(J1=J1, J2=J2, sigma_sq=sig2, A=A, A_prime=A_prime,
                          lambda_proj=lam)
