"""Spatially homogeneous dynamics of the reversal model.

Dropping space leaves three degrees of freedom: the directional imbalance

    d = (u - v)/2,

and the refractory masses u1, v1 of the two families (total mass is fixed
at 2, so u = 1 + d and v = 1 - d).  The vector field is

    d'  = turning(u) * v1 - turning(v) * u1
    u1' = aging(v) * (u - u1) - turning(v) * u1
    v1' = aging(u) * (v - v1) - turning(u) * v1

(the halving in d = (u-v)/2 cancels against the equal and opposite
conversion terms of u and v).

Steady states come in two families: the isotropic state d = 0 and, when the
slow drift of d after the fast u1/v1 relaxation has extra zeros, anisotropic
pairs +/- d.  ``net_drift`` evaluates that slow drift and its slope;
``anisotropy_onset`` is the combination of rate slopes at 1 whose sign
decides whether anisotropic states exist at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConsistencyError,
    DomainError,
    IntegrationError,
    ParameterError,
)
from .model import ModelParams
from .rates import Constant, SigmoidExp

__all__ = [
    "OdeState",
    "SteadyState",
    "StabilityVerdict",
    "HopfThresholds",
    "Trajectory",
    "ode_rhs",
    "net_drift",
    "anisotropy_onset",
    "find_steady_states",
    "ode_stability",
    "hopf_thresholds",
    "integrate_ode",
]

_MARGINAL_BAND = 1e-8


@dataclass(frozen=True)
class OdeState:
    """Point (d, u1, v1) of the homogeneous dynamics.

    Valid states satisfy |d| <= 1, 0 <= u1 <= 1 + d and 0 <= v1 <= 1 - d
    (refractory mass cannot exceed the family mass); construction enforces
    this up to a 1e-9 slack.
    """

    d: float
    u1: float
    v1: float

    def __post_init__(self):
        tol = 1e-9
        if abs(self.d) > 1.0 + tol:
            raise ParameterError(f"|d| must be <= 1, got {self.d}")
        if not -tol <= self.u1 <= 1.0 + self.d + tol:
            raise ParameterError(f"u1 must lie in [0, 1+d], got {self.u1}")
        if not -tol <= self.v1 <= 1.0 - self.d + tol:
            raise ParameterError(f"v1 must lie in [0, 1-d], got {self.v1}")

    def as_array(self):
        return np.array([self.d, self.u1, self.v1])


@dataclass(frozen=True)
class SteadyState:
    """Equilibrium of the homogeneous dynamics."""

    d: float
    u1: float
    v1: float
    kind: str  # 'isotropic' or 'anisotropic'
    stable: bool

    @property
    def state(self):
        return OdeState(self.d, self.u1, self.v1)


@dataclass(frozen=True)
class StabilityVerdict:
    verdict: str  # 'stable', 'unstable' or 'marginal'
    eigenvalues: tuple
    conditions: dict


@dataclass(frozen=True)
class HopfThresholds:
    """Aging-rate thresholds for the logistic-step turning rate.

    Valid when turning is a SigmoidExp and aging a Constant whose steepness
    satisfies alpha * lam_minus > 4 * lam_plus (lam_plus/minus the half sum
    and half difference of the two turning levels).  Increasing the aging
    level gamma then destabilises the isotropic state at gamma_star through
    an oscillatory instability, creates anisotropic pairs at gamma_hat and
    restabilises at gamma_star2.  Thresholds are distinct for all alpha when
    lam_hi < (2 + sqrt(3)) * lam_lo.
    """

    gamma_star: float
    gamma_hat: float
    gamma_star2: float
    applicable: bool
    checks: dict


def _rates_at(m: ModelParams, d):
    """turning/aging at the two family densities 1+d (u) and 1-d (v)."""
    lam = m.turning
    gam = m.aging
    u, v = 1.0 + d, 1.0 - d
    return lam.value(u), lam.value(v), gam.value(u), gam.value(v)


def _rhs(d, u1, v1, m: ModelParams):
    lam_u, lam_v, gam_u, gam_v = _rates_at(m, d)
    u, v = 1.0 + d, 1.0 - d
    dd = lam_u * v1 - lam_v * u1
    du1 = gam_v * (u - u1) - lam_v * u1
    dv1 = gam_u * (v - v1) - lam_u * v1
    return dd, du1, dv1


def ode_rhs(state: OdeState, m: ModelParams):
    """Vector field of the homogeneous dynamics as a (d', u1', v1') tuple."""
    return _rhs(state.d, state.u1, state.v1, m)


def _relaxed_fractions(m: ModelParams, d):
    """u1, v1 after the fast refractory relaxation at fixed d."""
    curves = m.curves
    u, v = 1.0 + d, 1.0 - d
    u1 = curves.reversible_fraction(v) * u
    v1 = curves.reversible_fraction(u) * v
    return u1, v1


def net_drift(d, m: ModelParams):
    """Slow drift of the imbalance d and its slope, after relaxing u1, v1.

    Writing Q(rho) = turning(rho)*aging(rho) / (turning(rho)+aging(rho)),
    the drift is G(d) = (1-d)*Q(1+d) - (1+d)*Q(1-d); it is odd in d, so
    steady imbalances away from 0 come in symmetric pairs.  Returns
    (G(d), G'(d)).
    """
    if abs(d) >= 1.0:
        raise DomainError(f"net_drift needs |d| < 1, got {d}")
    lam = m.turning
    gam = m.aging

    def q(rho):
        lv, gv = lam.value(rho), gam.value(rho)
        return lv * gv / (lv + gv)

    def qprime(rho):
        lv, gv = lam.value(rho), gam.value(rho)
        lp, gp = lam.derivative(rho), gam.derivative(rho)
        return (lp * gv * gv + gp * lv * lv) / (lv + gv) ** 2

    u, v = 1.0 + d, 1.0 - d
    g = v * q(u) - u * q(v)
    gp = -q(u) - q(v) + v * qprime(u) + u * qprime(v)
    return g, gp


def anisotropy_onset(m: ModelParams):
    """Sign marker for the birth of anisotropic steady states.

    tau = (g/l)*(turning'(1) - l) + (l/g)*(aging'(1) - g) with l, g the two
    rates at density 1.  tau and the drift slope G'(0) share their sign, so
    tau > 0 means the isotropic state sits between a fresh pair of
    anisotropic equilibria.
    """
    l = m.turning.value(1.0)
    g = m.aging.value(1.0)
    lp = m.turning.derivative(1.0)
    gp = m.aging.derivative(1.0)
    return (g / l) * (lp - l) + (l / g) * (gp - g)


def find_steady_states(m: ModelParams, n_scan=2048):
    """All homogeneous equilibria, isotropic first, then by increasing d.

    Scans the drift G on (-1, 1) with ``n_scan`` brackets, bisects every
    sign change to 1e-12 and deduplicates roots closer than 1e-8.  Stability
    of each state is attached via ``ode_stability`` (marginal counts as not
    stable).
    """
    ds = np.linspace(-1.0, 1.0, n_scan + 1)[1:-1]
    gs = np.array([net_drift(d, m)[0] for d in ds])

    roots = [0.0]
    for i in range(len(ds) - 1):
        a, b = ds[i], ds[i + 1]
        fa, fb = gs[i], gs[i + 1]
        if fa == 0.0:
            roots.append(a)
            continue
        if fa * fb < 0.0:
            for _ in range(200):
                mid = 0.5 * (a + b)
                fm = net_drift(mid, m)[0]
                if fm == 0.0 or (b - a) < 1e-12:
                    break
                if fa * fm < 0.0:
                    b, fb = mid, fm
                else:
                    a, fa = mid, fm
            roots.append(0.5 * (a + b))

    roots.sort()
    unique = []
    for r in roots:
        if not unique or abs(r - unique[-1]) > 1e-8:
            unique.append(r)

    states = []
    for d in unique:
        if abs(d) <= 1e-8:
            d = 0.0
        u1, v1 = _relaxed_fractions(m, d)
        kind = "isotropic" if d == 0.0 else "anisotropic"
        ss = SteadyState(d, u1, v1, kind, stable=False)
        verdict = ode_stability(ss, m)
        states.append(SteadyState(d, u1, v1, kind, verdict.verdict == "stable"))

    states.sort(key=lambda s: (s.kind != "isotropic", s.d))
    return states


def _isotropic_coefficients(m: ModelParams):
    """The four scalars l, g, b, c controlling the isotropic linearisation."""
    l = m.turning.value(1.0)
    g = m.aging.value(1.0)
    b = m.turning.derivative(1.0) * g / (g + l)
    c = m.aging.derivative(1.0) * l / (g + l)
    return l, g, b, c


def ode_stability(ss: SteadyState, m: ModelParams) -> StabilityVerdict:
    """Stability of one homogeneous equilibrium.

    Isotropic states use the closed-form spectrum: one real eigenvalue
    -(l+g) and the roots of z^2 + (l+g-2b) z + 2(l g - b g - c l), with
    l, g the rates at 1 and b, c the slope combinations from the
    linearisation.  The two reported conditions are

        drift_slope_negative:  tau < 0   (no anisotropic pair nearby),
        no_oscillatory_growth: l + g - 2b > 0.

    Anisotropic states report the necessary condition G'(d) < 0 and take
    their verdict from the numerically differentiated Jacobian.  A verdict
    is 'marginal' when the largest real part lies within 1e-8 of zero.
    """
    g_val, g_slope = net_drift(ss.d, m)
    if abs(g_val) > 1e-6:
        raise ConsistencyError(
            f"state with d={ss.d} is not steady: net drift {g_val:.3e}"
        )

    if ss.kind == "isotropic":
        l, g, b, c = _isotropic_coefficients(m)
        tr = l + g - 2.0 * b
        det = 2.0 * (l * g - b * g - c * l)
        disc = complex(tr * tr - 4.0 * det) ** 0.5
        eigs = (-(l + g) + 0j, 0.5 * (-tr + disc), 0.5 * (-tr - disc))
        conditions = {
            "drift_slope_negative": anisotropy_onset(m) < 0.0,
            "no_oscillatory_growth": tr > 0.0,
        }
    else:
        jac = _numeric_jacobian(ss, m)
        eigs = tuple(np.linalg.eigvals(jac))
        conditions = {"drift_slope_negative": g_slope < 0.0}

    max_re = max(e.real for e in eigs)
    if abs(max_re) <= _MARGINAL_BAND:
        verdict = "marginal"
    else:
        verdict = "stable" if max_re < 0.0 else "unstable"
    return StabilityVerdict(verdict, eigs, conditions)


def _numeric_jacobian(ss: SteadyState, m: ModelParams, h=1e-6):
    x0 = np.array([ss.d, ss.u1, ss.v1])
    jac = np.empty((3, 3))
    for j in range(3):
        plus = x0.copy()
        minus = x0.copy()
        plus[j] += h
        minus[j] -= h
        fp = np.array(_rhs(*plus, m))
        fm = np.array(_rhs(*minus, m))
        jac[:, j] = (fp - fm) / (2.0 * h)
    return jac


def hopf_thresholds(m: ModelParams) -> HopfThresholds:
    """Aging thresholds gamma_star < gamma_hat < gamma_star2 (see class doc)."""
    nan = float("nan")
    checks = {
        "sigmoid_exp_turning": isinstance(m.turning, SigmoidExp),
        "constant_aging": isinstance(m.aging, Constant),
    }
    if not all(checks.values()):
        checks["alpha_large_enough"] = False
        checks["thresholds_distinct"] = False
        return HopfThresholds(nan, nan, nan, False, checks)

    lam = m.turning
    lam_plus = 0.5 * (lam.lam_hi + lam.lam_lo)
    lam_minus = 0.5 * (lam.lam_hi - lam.lam_lo)
    a = lam.alpha

    checks["alpha_large_enough"] = a * lam_minus > 4.0 * lam_plus
    checks["thresholds_distinct"] = lam.lam_hi < (2.0 + math.sqrt(3.0)) * lam.lam_lo

    gamma_hat = 2.0 * lam_plus ** 2 / (a * lam_minus - 2.0 * lam_plus) \
        if a * lam_minus > 2.0 * lam_plus else nan
    disc = a * lam_minus * (a * lam_minus - 4.0 * lam_plus)
    if disc >= 0.0:
        root = math.sqrt(disc)
        gamma_star = 0.5 * (a * lam_minus - 2.0 * lam_plus - root)
        gamma_star2 = 0.5 * (a * lam_minus - 2.0 * lam_plus + root)
    else:
        gamma_star = gamma_star2 = nan

    applicable = all(checks.values())
    return HopfThresholds(gamma_star, gamma_hat, gamma_star2, applicable, checks)


@dataclass(frozen=True)
class Trajectory:
    """Time-sampled solution of the homogeneous dynamics.

    ``states`` has one row per stored time with columns (d, u1, v1).  The
    limit-cycle fields summarise the last 20% of the run: the d-range over
    the tail and the closest distance from the final state back to the
    earlier tail polyline.  ``limit_cycle`` is True when that distance is
    below 1e-6 while the tail amplitude exceeds 1e-4.
    """

    t: np.ndarray
    states: np.ndarray
    limit_cycle: bool
    tail_min_d: float
    tail_max_d: float
    return_distance: float

    @property
    def d(self):
        return self.states[:, 0]

    @property
    def u1(self):
        return self.states[:, 1]

    @property
    def v1(self):
        return self.states[:, 2]

    @property
    def final(self):
        d, u1, v1 = self.states[-1]
        return OdeState(d, u1, v1)


def _segment_distance(points, x):
    """Min distance from x to the polyline through ``points`` (N x 3)."""
    a = points[:-1]
    b = points[1:]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    denom[denom == 0.0] = 1.0
    t = np.clip(np.einsum("ij,ij->i", x - a, ab) / denom, 0.0, 1.0)
    proj = a + ab * t[:, None]
    return float(np.min(np.linalg.norm(proj - x, axis=1)))


def integrate_ode(state0: OdeState, m: ModelParams, t_end, dt=1e-3,
                  store_every=1) -> Trajectory:
    """Integrate with classical fixed-step RK4 and detect limit cycles.

    Raises IntegrationError if the state leaves the invariant region
    |d| <= 1, 0 <= u1 <= 1+d, 0 <= v1 <= 1-d by more than 1e-6 (the region
    is invariant for the exact flow, so leaving it means dt is too large).
    """
    if t_end <= 0 or dt <= 0:
        raise ParameterError("t_end and dt must be positive")
    n_steps = int(round(t_end / dt))
    d, u1, v1 = state0.d, state0.u1, state0.v1

    times = [0.0]
    stored = [(d, u1, v1)]
    # cycle detection always works on every step of the last fifth of the
    # run, independent of the storage stride, so its geometric tolerance
    # does not depend on how coarsely the caller samples the trajectory
    tail_from = n_steps - n_steps // 5
    tail = []
    slack = 1e-6
    for step in range(1, n_steps + 1):
        k1 = _rhs(d, u1, v1, m)
        k2 = _rhs(d + 0.5 * dt * k1[0], u1 + 0.5 * dt * k1[1],
                  v1 + 0.5 * dt * k1[2], m)
        k3 = _rhs(d + 0.5 * dt * k2[0], u1 + 0.5 * dt * k2[1],
                  v1 + 0.5 * dt * k2[2], m)
        k4 = _rhs(d + dt * k3[0], u1 + dt * k3[1], v1 + dt * k3[2], m)
        d += dt * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]) / 6.0
        u1 += dt * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]) / 6.0
        v1 += dt * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]) / 6.0

        if (abs(d) > 1.0 + slack or u1 < -slack or v1 < -slack
                or u1 > 1.0 + d + slack or v1 > 1.0 - d + slack):
            raise IntegrationError(
                f"state left the invariant region at t={step * dt:.6g} "
                f"(d={d:.6g}, u1={u1:.6g}, v1={v1:.6g}); reduce dt"
            )
        if step % store_every == 0 or step == n_steps:
            times.append(step * dt)
            stored.append((d, u1, v1))
        if step >= tail_from:
            tail.append((d, u1, v1))

    t = np.array(times)
    states = np.array(stored)
    tail = np.array(tail)

    tail_min = float(tail[:, 0].min())
    tail_max = float(tail[:, 0].max())
    amplitude = tail_max - tail_min

    # Distance from the final state back to the earlier part of the tail:
    # exclude the last 10% of tail samples so a converging spiral does not
    # trivially match its own endpoint.
    cut = max(2, int(0.9 * len(tail)))
    if cut >= 2:
        return_dist = _segment_distance(tail[:cut], states[-1])
    else:
        return_dist = float("inf")
    limit_cycle = amplitude > 1e-4 and return_dist < 1e-6

    return Trajectory(t, states, limit_cycle, tail_min, tail_max, return_dist)
