"""Linear stability of homogeneous states under the full transport model.

Perturbing a homogeneous equilibrium with a Fourier mode exp(i k x) turns
the four-field linearisation into the complex 4x4 eigenproblem

    A(k) = M - i k T,      T = diag(1, -1, 1, -1),

with M the reaction Jacobian in the field order (u, v, u1, v1).  For the
isotropic state the quartic characteristic polynomial has real
coefficients, and the standard sign conditions on

    a0, a1, a2, a3,  p = a3 a2 - a1,  q = a3 a2 a1 - a1^2 - a3^2 a0

decide whether all four eigenvalues have negative real part.  This module
evaluates those coefficients directly from the rate values/slopes at
density 1, and independently computes the spectrum of the assembled matrix
(characteristic polynomial by the Faddeev-LeVerrier recursion, roots by
Durand-Kerner iteration) so the two routes can be cross-checked.

Wavenumbers on the unit ring are k = 2 pi n.  The n = 0 mode always has a
zero eigenvalue (mass is conserved) and never counts towards instability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ParameterError, UsageError
from .model import ModelParams
from .ode import SteadyState, _isotropic_coefficients

__all__ = [
    "RhCoefficients",
    "DispersionPoint",
    "StabilityReport",
    "rh_coefficients",
    "reaction_jacobian",
    "transport_matrix",
    "char_poly_coeffs",
    "durand_kerner",
    "spectrum_at_k",
    "isotropic_transport_stability",
    "anisotropic_necessary_conditions",
    "wave_formation_range",
]

_MARGINAL_BAND = 1e-8


@dataclass(frozen=True)
class RhCoefficients:
    """Sign-condition data for the isotropic quartic at one wavenumber.

    The state is linearly stable at this k exactly when a0, a1, a2, a3, p
    and q are all positive.  ``margin`` is the smallest of the six;
    ``passed`` is None when the margin sits within 1e-8 of zero.
    """

    k: float
    a0: float
    a1: float
    a2: float
    a3: float
    p: float
    q: float

    @property
    def margin(self):
        return min(self.a0, self.a1, self.a2, self.a3, self.p, self.q)

    @property
    def passed(self):
        if abs(self.margin) <= _MARGINAL_BAND:
            return None
        return self.margin > 0.0


@dataclass(frozen=True)
class DispersionPoint:
    k: float
    eigenvalues: tuple
    max_real: float
    rh_pass: object  # True / False / None (marginal), None also when k != real isotropic case


@dataclass(frozen=True)
class StabilityReport:
    """Verdict on an isotropic state across all ring modes up to n_max."""

    verdict: str  # 'stable', 'unstable' or 'inconclusive'
    isotropic_conditions: dict
    rh_points: tuple
    most_unstable_k: float
    most_unstable_growth: float


def rh_coefficients(m: ModelParams, k) -> RhCoefficients:
    """Quartic coefficients and sign combinations at wavenumber k.

    Closed forms in l = turning(1), g = aging(1) and the slope combinations
    b = turning'(1) g/(g+l), c = aging'(1) l/(g+l):

        a3 = 2 (g + l - b)
        a2 = 2 k^2 + (g+l)(g+l-2b) + 2 (g l - b g - c l)
        a1 = 2 [ k^2 (g + l - b) + (g+l)(g l - b g - c l) ]
        a0 = k^2 [ k^2 + g^2 + l^2 + 2 l (b - c) ]

    with p and q linear in k^2 as written below.
    """
    l, g, b, c = _isotropic_coefficients(m)
    k2 = float(k) ** 2
    s = g + l
    det2 = g * l - b * g - c * l

    a3 = 2.0 * (s - b)
    a2 = 2.0 * k2 + s * (s - 2.0 * b) + 2.0 * det2
    a1 = 2.0 * (k2 * (s - b) + s * det2)
    a0 = k2 * (k2 + g * g + l * l + 2.0 * l * (b - c))

    p0 = 2.0 * (s - 2.0 * b) * (s * (s - b) + det2)
    p1 = 2.0 * (s - b)
    p = p1 * k2 + p0

    q0 = 4.0 * s * det2 * (s - 2.0 * b) * (s * (s - b) + det2)
    q1 = 16.0 * (s - b) ** 2 * (g * l - b * s)
    q = q1 * k2 + q0

    return RhCoefficients(float(k), a0, a1, a2, a3, p, q)


def transport_matrix():
    """Signed transport directions of the four fields (u, v, u1, v1)."""
    return np.diag([1.0, -1.0, 1.0, -1.0])


def reaction_jacobian(m: ModelParams, ss: SteadyState):
    """Jacobian M of the reaction terms at a homogeneous state.

    Field order (u, v, u1, v1).  Written for a general equilibrium
    (u, v, u1, v1) = (1+d, 1-d, u1, v1); at the isotropic state it reduces
    to the l, g, b, c closed form used by ``rh_coefficients``.
    """
    lam, gam = m.turning, m.aging
    u, v = 1.0 + ss.d, 1.0 - ss.d
    u1, v1 = ss.u1, ss.v1
    lam_u, lam_v = lam.value(u), lam.value(v)
    dlam_u, dlam_v = lam.derivative(u), lam.derivative(v)
    gam_u, gam_v = gam.value(u), gam.value(v)
    dgam_u, dgam_v = gam.derivative(u), gam.derivative(v)

    row_u = np.array([dlam_u * v1, -dlam_v * u1, -lam_v, lam_u])
    row_u1 = np.array([
        gam_v,
        dgam_v * (u - u1) - dlam_v * u1,
        -gam_v - lam_v,
        0.0,
    ])
    row_v1 = np.array([
        dgam_u * (v - v1) - dlam_u * v1,
        gam_u,
        0.0,
        -gam_u - lam_u,
    ])
    return np.vstack([row_u, -row_u, row_u1, row_v1])


def char_poly_coeffs(a):
    """Coefficients of det(zI - A) by the Faddeev-LeVerrier recursion.

    Returns [c0, ..., c_{n-1}] for z^n + c_{n-1} z^{n-1} + ... + c0.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if a.ndim != 2 or a.shape != (n, n):
        raise ParameterError("char_poly_coeffs needs a square matrix")
    coeffs = np.empty(n, dtype=complex)
    eye = np.eye(n, dtype=complex)
    mat = a.copy()
    for i in range(1, n + 1):
        c = -np.trace(mat) / i
        coeffs[n - i] = c
        if i < n:
            mat = a @ (mat + c * eye)
    return coeffs


def durand_kerner(coeffs, tol=1e-12, max_iter=200):
    """All roots of a monic polynomial by simultaneous iteration.

    ``coeffs`` are [c0, ..., c_{n-1}] as produced by ``char_poly_coeffs``.
    Raises NumericError (with the residual in the message) when the
    iteration has not converged after ``max_iter`` sweeps.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    n = len(coeffs)
    if n == 0:
        return np.empty(0, dtype=complex)

    def poly(z):
        out = np.ones_like(z)
        for c in coeffs[::-1]:
            out = out * z + c
        return out

    # start on a ring at the Fujiwara root bound, with an irrational phase
    # offset so symmetric root patterns cannot trap the iteration
    radius = 2.0 * max(abs(coeffs[n - i]) ** (1.0 / i) for i in range(1, n + 1))
    radius = max(radius, 1e-3)
    angles = 2.0 * np.pi * (np.arange(n) + 0.3281) / n + 0.4
    z = radius * np.exp(1j * angles)

    for _ in range(max_iter):
        vals = poly(z)
        new = z.copy()
        for i in range(n):
            denom = np.prod(new[i] - np.delete(new, i))
            if denom == 0:
                denom = 1e-30
            new[i] = new[i] - vals[i] / denom
        if np.any(~np.isfinite(new)):
            raise NumericError("root iteration diverged to non-finite values")
        step = np.max(np.abs(new - z))
        z = new
        if step < tol * max(1.0, float(np.max(np.abs(z)))):
            return z
    resid = float(np.max(np.abs(poly(z))))
    raise NumericError(
        f"root iteration did not converge in {max_iter} sweeps "
        f"(residual {resid:.3e})"
    )


def spectrum_at_k(m: ModelParams, ss: SteadyState, k) -> DispersionPoint:
    """Four transport-reaction eigenvalues of one Fourier mode."""
    a = reaction_jacobian(m, ss) - 1j * float(k) * transport_matrix()
    coeffs = char_poly_coeffs(a)
    eigs = durand_kerner(coeffs)
    eigs = tuple(sorted(eigs, key=lambda z: -z.real))
    max_real = max(e.real for e in eigs)
    rh = rh_coefficients(m, k).passed if ss.kind == "isotropic" else None
    return DispersionPoint(float(k), eigs, float(max_real), rh)


def _golden_max(fun, lo, hi, tol=1e-6, max_iter=80):
    """Golden-section maximisation of a unimodal scalar function."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    x = 0.5 * (a + b)
    return x, fun(x)


def isotropic_transport_stability(m: ModelParams, n_max=64) -> StabilityReport:
    """Stability of the isotropic state against all ring modes n = 1..n_max.

    The reported conditions are the sufficient criterion

        lambda_prime_ok: 0 < turning'(1) < turning(1)
        gamma_prime_ok:  aging'(1) < aging(1)
        super_linear:    turning'(1) > turning(1)  (forces instability)

    The verdict is 'stable' when the sufficient criterion holds and every
    sampled mode passes its sign conditions, 'unstable' when the turning
    slope is super-linear or any mode fails, and 'inconclusive' otherwise
    (e.g. marginal margins).  ``most_unstable_k`` refines the largest
    growth rate over a continuous k-neighbourhood of the worst sampled
    mode; it reports the least-damped k even when stable.
    """
    if n_max < 1:
        raise ParameterError("n_max must be >= 1")
    lam_1 = m.turning.value(1.0)
    lam_p = m.turning.derivative(1.0)
    gam_1 = m.aging.value(1.0)
    gam_p = m.aging.derivative(1.0)
    conditions = {
        "lambda_prime_ok": 0.0 < lam_p < lam_1,
        "gamma_prime_ok": gam_p < gam_1,
        "super_linear": lam_p > lam_1,
    }

    u1 = m.curves.reversible_fraction(1.0)
    iso = SteadyState(0.0, u1, u1, "isotropic", False)

    rh_points = []
    any_fail = False
    any_marginal = False
    best_n, best_growth = 1, -math.inf
    for n in range(1, n_max + 1):
        k = 2.0 * math.pi * n
        rc = rh_coefficients(m, k)
        point = spectrum_at_k(m, iso, k)
        rh_points.append((n, rc, point))
        if rc.passed is False:
            any_fail = True
        elif rc.passed is None:
            any_marginal = True
        if point.max_real > best_growth:
            best_growth = point.max_real
            best_n = n

    # refine the continuous growth-rate peak around the worst sampled mode
    def growth(k):
        return spectrum_at_k(m, iso, k).max_real

    k_lo = 2.0 * math.pi * max(best_n - 1, 0) + 1e-9
    k_hi = 2.0 * math.pi * (best_n + 1)
    k_star, g_star = _golden_max(growth, k_lo, k_hi)

    sufficient = conditions["lambda_prime_ok"] and conditions["gamma_prime_ok"]
    if any_fail or conditions["super_linear"]:
        verdict = "unstable"
    elif sufficient and not any_marginal:
        verdict = "stable"
    elif not any_marginal and not any_fail and best_growth < -_MARGINAL_BAND:
        # all sampled modes clearly decay even without the sufficient criterion
        verdict = "stable"
    else:
        verdict = "inconclusive"

    return StabilityReport(
        verdict, conditions, tuple(rh_points), float(k_star), float(g_star)
    )


def anisotropic_necessary_conditions(ss: SteadyState, m: ModelParams):
    """Necessary stability conditions at an anisotropic equilibrium.

    Returns a dict with the slow-drift slope condition and the balance
    slopes at the two plateau densities (each must be positive for the
    state to survive as part of a stable pattern).
    """
    if ss.kind == "isotropic":
        raise UsageError("anisotropic_necessary_conditions needs d != 0")
    from .ode import net_drift  # local import to avoid cycle at module load

    _, slope = net_drift(ss.d, m)
    curves = m.curves
    return {
        "drift_slope_negative": slope < 0.0,
        "balance_slope_up_positive": float(curves.balance_slope(1.0 + ss.d)) > 0.0,
        "balance_slope_down_positive": float(curves.balance_slope(1.0 - ss.d)) > 0.0,
    }


def wave_formation_range(lam_min, lam_max, rho_mean):
    """Mean-mass window in which two-plateau waves can form.

    For turning rates sweeping from lam_min to lam_max, plateau pairs with
    mean rho_mean require lam_max > 3 lam_min, and the refractory-free mass
    per family must lie strictly between the returned bounds
    (2 lam_min / (lam_max - lam_min) and
    2 (lam_max - 2 lam_min) / (lam_max - lam_min), both times rho_mean).
    """
    if not 0.0 < lam_min < lam_max:
        raise ParameterError("need 0 < lam_min < lam_max")
    if rho_mean <= 0.0:
        raise ParameterError("rho_mean must be positive")
    spread = lam_max - lam_min
    lo = 2.0 * lam_min / spread * rho_mean
    hi = 2.0 * (lam_max - 2.0 * lam_min) / spread * rho_mean
    feasible = lam_max > 3.0 * lam_min
    return feasible, lo, hi
