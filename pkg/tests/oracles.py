"""Independent cross-check oracles used by the test suite.

Everything here deliberately avoids the package's own finite-element and
finite-difference machinery: the Poincare oracles work in global function
bases (probabilists' Hermite polynomials, cubic B-splines) and the KL oracle
integrates the ratio directly.  Agreement between these and the package is
the point of the tests, so shared code paths would defeat the purpose.
"""
import math

import numpy as np
from numpy.polynomial import hermite_e
from scipy import linalg
from scipy.interpolate import BSpline

trapz = getattr(np, "trapezoid", np.trapz)


def hermite_restricted_poincare(n_basis: int = 24, n_quad: int = 120) -> float:
    """Restricted Poincare constant of N(0,1) via a Hermite spectral basis.

    Expands test functions in He_1..He_n and maximizes E[g^2]/E[g'^2] over
    the subspace with E[g] = 0 and E[g'] = 0, using Gauss-Hermite quadrature
    for every moment.  The exact answer is 1/2 (attained by He_2).
    """
    # physicists' nodes/weights, converted to the N(0,1) measure
    x_ph, w_ph = np.polynomial.hermite.hermgauss(n_quad)
    x = x_ph * math.sqrt(2.0)
    w = w_ph / math.sqrt(math.pi)

    basis = []
    dbasis = []
    for k in range(1, n_basis + 1):
        # orthonormal scaling He_k / sqrt(k!); the raw polynomials make the
        # constraint null-space computation hopelessly ill-conditioned
        coef = np.zeros(k + 1)
        coef[k] = 1.0 / math.sqrt(math.factorial(k))
        basis.append(hermite_e.hermeval(x, coef))
        dbasis.append(hermite_e.hermeval(x, hermite_e.hermeder(coef)))
    B = np.array(basis)
    D = np.array(dbasis)

    M = (B * w) @ B.T         # E[phi_i phi_j]
    S = (D * w) @ D.T         # E[phi_i' phi_j']
    a = B @ w                 # E[phi_i]
    b = D @ w                 # E[phi_i']
    C = np.column_stack([a, b])
    null = linalg.null_space(C.T)
    Mn = null.T @ M @ null
    Sn = null.T @ S @ null
    vals = linalg.eigh(Mn, Sn, eigvals_only=True)
    return float(vals[-1])


def bruteforce_restricted_poincare(x: np.ndarray, f: np.ndarray,
                                   n_basis: int = 60,
                                   constrain_derivative: bool = True) -> float:
    """Rayleigh-quotient maximization in a cubic B-spline basis.

    Works directly from density samples on a uniform grid; all moments by
    trapezoid quadrature against f.  Returns sup E[g^2]/E[g'^2] subject to
    E[g] = 0 (and E[g'] = 0 unless disabled).
    """
    # restrict to where the density carries mass, else the quotient is
    # dominated by regions of zero measure
    keep = f >= 1e-12 * f.max()
    lo, hi = x[keep][0], x[keep][-1]

    degree = 3
    n_knots = n_basis - degree + 1
    inner = np.linspace(lo, hi, n_knots)
    knots = np.concatenate([[lo] * degree, inner, [hi] * degree])

    xs = x[(x >= lo) & (x <= hi)]
    fs = f[(x >= lo) & (x <= hi)]
    B = np.empty((n_basis, xs.size))
    D = np.empty((n_basis, xs.size))
    for i in range(n_basis):
        c = np.zeros(n_basis)
        c[i] = 1.0
        sp = BSpline(knots, c, degree, extrapolate=False)
        B[i] = np.nan_to_num(sp(xs))
        D[i] = np.nan_to_num(sp.derivative()(xs))

    M = np.array([[trapz(B[i] * B[j] * fs, xs) for j in range(n_basis)]
                  for i in range(n_basis)])
    S = np.array([[trapz(D[i] * D[j] * fs, xs) for j in range(n_basis)]
                  for i in range(n_basis)])
    a = np.array([trapz(B[i] * fs, xs) for i in range(n_basis)])
    b = np.array([trapz(D[i] * fs, xs) for i in range(n_basis)])
    C = np.column_stack([a, b]) if constrain_derivative else a[:, None]
    null = linalg.null_space(C.T)
    Mn = null.T @ M @ null
    Sn = null.T @ S @ null
    # S is singular in directions that vanish f-a.e.; regularize tiny modes
    vals = linalg.eigh(Mn, Sn + 1e-12 * np.eye(Sn.shape[0]), eigvals_only=True)
    return float(vals[-1])


def direct_kl_to_gaussian(x: np.ndarray, f: np.ndarray) -> float:
    """KL(f || matched Gaussian) by direct quadrature of f ln(f/phi)."""
    mean = trapz(x * f, x)
    var = trapz((x - mean) ** 2 * f, x)
    phi = np.exp(-((x - mean) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)
    good = f > 1e-300
    integrand = np.zeros_like(f)
    integrand[good] = f[good] * np.log(f[good] / phi[good])
    return float(trapz(integrand, x))
