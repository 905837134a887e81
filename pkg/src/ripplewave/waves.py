"""Construction of plateau travelling waves.

A counter-propagating wave consists of plateaus of the right-moving family
density joined by jumps, riding at the transport speed.  Everything here is
organised around the balance curve  Lambda(rho) = rho / turning(rho):

* plateaus of a memory-free wave must share one balance value r
  (condition A), sit on branches where the balance curve increases
  (condition B, linear stability of the plateau), and have equal values of
  the selection integral  integral_0^rho turning - turning(rho) rho / 2
  (condition C, which selects the jump pair an established pattern locks
  onto); ``find_stable_tuples`` enumerates such tuples, and
  ``heteroclinic_check`` tests whether the sharp-interface profile joining
  two plateaus actually exists as a saddle-to-saddle orbit of the interface
  equation  Q'' = turning(w1) Q - turning(Q) w1.

* with reversal memory, the profile P of the right-moving family obeys

    P' = turning(P) [ P (turning(P)+aging(P)) - turning(P) aging(P) r ]
         / ( 2 (turning(P) - P turning'(P)) ),

  while the refractory fraction of the opposing family, expressed in the
  co-moving frame, is  B = Lambda(P)/r.  ``construct_admissible_wave``
  builds a periodic profile from two monotone arcs joined by jumps that
  conserve the balance value, either by direct integration (generic path)
  or, for the ramp-step turning rate with constant aging, from the exact
  exponential-arc formulas (closed form).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConsistencyError,
    ConstructionError,
    NoWaveError,
    ParameterError,
    ReachabilityError,
    SingularityError,
    UsageError,
)
from .model import DerivedCurves, ModelParams
from .rates import Constant, PiecewiseLinearStep

__all__ = [
    "Branch",
    "WaveTuple",
    "PhaseOrbit",
    "Segment",
    "AdmissibleWave",
    "WaveBounds",
    "admissible_branches",
    "find_stable_tuples",
    "antisymmetric_pair",
    "heteroclinic_check",
    "wave_profile_slope",
    "jump_partner",
    "reachable_values",
    "wave_bounds",
    "construct_admissible_wave",
]


# --------------------------------------------------------------------------
# balance-curve branches


@dataclass(frozen=True)
class Branch:
    """Maximal density interval on which the balance curve increases."""

    index: int
    lo: float
    hi: float
    balance_lo: float
    balance_hi: float

    def contains(self, rho, tol=1e-12):
        return self.lo - tol <= rho <= self.hi + tol


def _balance_numerator(m: ModelParams, rho):
    """turning - rho*turning', the sign of the balance slope."""
    return m.turning.value(rho) - rho * m.turning.derivative(rho)


def admissible_branches(m: ModelParams, rho_max=5.0, n_grid=4096):
    """Increasing branches of the balance curve on (0, rho_max].

    The slope sign is sampled on a uniform grid and each flip refined by
    bisection, which also lands on kinks where the sign jumps without a
    zero.  The first branch always starts at 0 (the balance curve rises
    like rho/turning(0) there); the last may be cut off at rho_max.
    """
    if rho_max <= 0:
        raise ParameterError("rho_max must be positive")
    grid = np.linspace(rho_max / n_grid, rho_max, n_grid)
    sign = _balance_numerator(m, grid) > 0.0

    flips = []
    for i in np.nonzero(sign[:-1] != sign[1:])[0]:
        a, b = grid[i], grid[i + 1]
        target = sign[i + 1]
        for _ in range(80):
            mid = 0.5 * (a + b)
            if (_balance_numerator(m, mid) > 0.0) == target:
                b = mid
            else:
                a = mid
        flips.append((0.5 * (a + b), bool(target)))

    curves = m.curves
    edges = [0.0]
    rising = [bool(sign[0])]
    for x, to_positive in flips:
        edges.append(x)
        rising.append(to_positive)
    edges.append(rho_max)

    branches = []
    for j in range(len(rising)):
        if rising[j]:
            lo, hi = edges[j], edges[j + 1]
            bal_lo = 0.0 if lo == 0.0 else float(curves.balance(lo))
            bal_hi = float(curves.balance(hi))
            branches.append(Branch(len(branches), lo, hi, bal_lo, bal_hi))
    return branches


def _invert_balance(curves: DerivedCurves, branch: Branch, level):
    """Density on a branch with the given balance value (vectorised).

    ``level`` must lie inside (balance_lo, balance_hi); bisection to a
    relative width of ~1e-15 in density.
    """
    levels = np.atleast_1d(np.asarray(level, dtype=float))
    slack = 1e-9 * max(branch.balance_hi - branch.balance_lo, 1e-12)
    if np.any(levels < branch.balance_lo - slack) or np.any(
        levels > branch.balance_hi + slack
    ):
        raise ParameterError(
            f"balance value outside branch range "
            f"[{branch.balance_lo}, {branch.balance_hi}]"
        )
    lo = np.full_like(levels, branch.lo if branch.lo > 0 else 1e-12)
    hi = np.full_like(levels, branch.hi)
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        below = curves.balance(mid) < levels
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    return float(out[0]) if np.ndim(level) == 0 else out


def _branch_of(branches, rho, tol=1e-9):
    for br in branches:
        if br.contains(rho, tol):
            return br
    return None


# --------------------------------------------------------------------------
# plateau tuples


@dataclass(frozen=True)
class WaveTuple:
    """Plateau densities satisfying the wave conditions.

    ``values`` share the balance value ``r`` and the selection integral;
    ``linear_stable`` records the balance-slope sign at each value (all
    True for tuples produced here), and ``selected`` additionally requires
    a connecting interface orbit from the lowest plateau to every other.
    """

    values: tuple
    r: float
    linear_stable: tuple
    selected: bool


def find_stable_tuples(m: ModelParams, rho_max=5.0):
    """All plateau tuples on (0, rho_max], ordered by their lowest value.

    For every pair of increasing branches, the shared-balance family is
    parameterised by the balance value and the selection-integral mismatch
    is scanned for sign changes (256 samples, then bisection).  Pairs
    sharing a plateau value within 1e-8 are chained into longer tuples.
    """
    branches = admissible_branches(m, rho_max)
    curves = m.curves
    omega = curves.selection_integral

    pairs = []
    for i in range(len(branches)):
        for j in range(i + 1, len(branches)):
            bi, bj = branches[i], branches[j]
            lo = max(bi.balance_lo, bj.balance_lo)
            hi = min(bi.balance_hi, bj.balance_hi)
            if hi <= lo:
                continue
            inset = 1e-7 * (hi - lo)
            levels = np.linspace(lo + inset, hi - inset, 256)
            w_lo = _invert_balance(curves, bi, levels)
            w_hi = _invert_balance(curves, bj, levels)
            mismatch = omega(w_hi) - omega(w_lo)

            sign_flip = np.sign(mismatch[:-1]) * np.sign(mismatch[1:]) < 0
            for idx in np.nonzero(sign_flip)[0]:
                a, b = levels[idx], levels[idx + 1]
                fa = mismatch[idx]
                for _ in range(100):
                    mid = 0.5 * (a + b)
                    fm = omega(_invert_balance(curves, bj, mid)) - omega(
                        _invert_balance(curves, bi, mid)
                    )
                    if fa * fm <= 0.0:
                        b = mid
                    else:
                        a, fa = mid, fm
                level = 0.5 * (a + b)
                w1 = _invert_balance(curves, bi, level)
                w2 = _invert_balance(curves, bj, level)
                pairs.append((w1, w2, level))

    # deduplicate and chain pairs that share a plateau value
    groups = []
    for w1, w2, level in pairs:
        for grp in groups:
            if abs(grp["r"] - level) < 1e-8 and any(
                abs(v - w) < 1e-8 for v in grp["values"] for w in (w1, w2)
            ):
                grp["values"].update({_snap(w1, grp["values"]), _snap(w2, grp["values"])})
                break
        else:
            groups.append({"r": level, "values": {w1, w2}})

    tuples = []
    for grp in groups:
        values = tuple(sorted(grp["values"]))
        stable = tuple(bool(curves.balance_slope(v) > 0.0) for v in values)
        base = values[0]
        selected = all(
            heteroclinic_check(m, base, other).is_heteroclinic
            for other in values[1:]
        )
        tuples.append(WaveTuple(values, grp["r"], stable, selected))
    tuples.sort(key=lambda t: t.values[0])
    return tuples


def _snap(w, existing, tol=1e-8):
    for v in existing:
        if abs(v - w) < tol:
            return v
    return w


def antisymmetric_pair(m: ModelParams, rho_center=1.0, w1_guess=0.5):
    """Plateau pair of a turning rate anti-symmetric about rho_center.

    When turning(rho_center+s) + turning(rho_center-s) is constant for all
    s in [0, rho_center], a plateau pair mirrors about the centre and the
    selection condition holds automatically; the pair solves
    turning(w) = c w / (2 rho_center) with c the constant sum.  Returns the
    tuple (w1, 2 rho_center - w1).
    """
    lam = m.turning
    if rho_center <= 0:
        raise ParameterError("rho_center must be positive")
    s = np.linspace(0.0, rho_center, 513)
    total = lam.value(rho_center + s) + lam.value(rho_center - s)
    c = 2.0 * lam.value(rho_center)
    if np.max(np.abs(total - c)) > 1e-9 * max(1.0, c):
        raise ParameterError(
            "turning rate is not anti-symmetric about the requested centre"
        )

    def h(w):
        return lam.value(w) - c * w / (2.0 * rho_center)

    lo = hi = min(max(w1_guess, 1e-9), rho_center * (1.0 - 1e-6))
    for _ in range(80):
        if h(lo) * h(hi) < 0.0:
            break
        lo = max(lo * 0.8, 1e-12)
        hi = min(hi * 1.2, rho_center * (1.0 - 1e-6))
    else:
        raise NoWaveError(
            "no off-centre solution of the anti-symmetric plateau equation "
            f"near {w1_guess}"
        )
    fa = h(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = h(mid)
        if hi - lo < 1e-14:
            break
        if fa * fm <= 0.0:
            hi = mid
        else:
            lo, fa = mid, fm
    w1 = 0.5 * (lo + hi)
    w2 = 2.0 * rho_center - w1

    curves = m.curves
    omega = curves.selection_integral
    scale = max(1.0, abs(float(omega(w1))))
    if abs(float(omega(w2)) - float(omega(w1))) > 1e-8 * scale:
        raise ConsistencyError(
            "selection integrals of the mirrored pair disagree; the "
            "anti-symmetry check passed spuriously"
        )
    stable = (bool(curves.balance_slope(w1) > 0), bool(curves.balance_slope(w2) > 0))
    selected = all(stable) and heteroclinic_check(m, w1, w2).is_heteroclinic
    return WaveTuple((w1, w2), float(curves.balance(w1)), stable, selected)


# --------------------------------------------------------------------------
# interface orbits


@dataclass(frozen=True)
class PhaseOrbit:
    """Shooting orbit of the sharp-interface equation between two plateaus."""

    w_start: float
    w_target: float
    samples: np.ndarray  # (n, 2) columns (Q, Q')
    is_heteroclinic: bool
    min_distance: float
    energy_residual: float
    energy_scale: float
    escaped: bool


def heteroclinic_check(m: ModelParams, w1, w2, step=1e-3, z_max=200.0,
                       offset=1e-5, capture_tol=1e-4) -> PhaseOrbit:
    """Shoot along the unstable direction of plateau w1 towards w2.

    The interface profile Q obeys Q'' = turning(w1) Q - turning(Q) w1, a
    conservative oscillator whose plateau states are saddles on increasing
    balance branches.  The orbit leaves (w1, 0) along the unstable
    eigenvector with offset 1e-5 and is integrated by fixed-step RK4; it
    counts as connecting when it passes within ``capture_tol`` of (w2, 0).
    Escape beyond [0, 10 max(w1, w2)] ends the shot early.
    """
    lam = m.turning
    lam_w1 = lam.value(w1)
    mu_sq = lam_w1 - w1 * lam.derivative(w1)
    if mu_sq <= 0.0:
        raise UsageError(
            "start plateau is not on an increasing balance branch; the "
            "interface equation has no saddle there"
        )
    mu = math.sqrt(mu_sq)
    direction = 1.0 if w2 > w1 else -1.0

    def force(q):
        return lam_w1 * q - lam.value(q if q > 0.0 else 0.0) * w1

    integral = lam.integral

    def energy(q):
        qc = q if q > 0.0 else 0.0
        return w1 * (integral(qc) - integral(w1)) - 0.5 * lam_w1 * (qc * qc - w1 * w1)

    q = w1 + direction * offset
    v = direction * offset * mu
    e0 = energy(q) + 0.5 * v * v

    q_cap = 10.0 * max(w1, w2)
    best = math.hypot(q - w2, v)
    samples = [(q, v)]
    resid = 0.0
    escale = abs(energy(w2))
    escaped = False
    connected = False

    n_steps = int(z_max / step)
    for i in range(1, n_steps + 1):
        k1q, k1v = v, force(q)
        k2q = v + 0.5 * step * k1v
        k2v = force(q + 0.5 * step * k1q)
        k3q = v + 0.5 * step * k2v
        k3v = force(q + 0.5 * step * k2q)
        k4q = v + step * k3v
        k4v = force(q + step * k3q)
        q += step * (k1q + 2 * k2q + 2 * k3q + k4q) / 6.0
        v += step * (k1v + 2 * k2v + 2 * k3v + k4v) / 6.0

        dist = math.hypot(q - w2, v)
        if dist < best:
            best = dist
        if i % 10 == 0:
            samples.append((q, v))
            e = energy(q) + 0.5 * v * v
            resid = max(resid, abs(e - e0))
            escale = max(escale, abs(energy(q)))
        if dist < capture_tol:
            connected = True
            break
        if q < 0.0 or q > q_cap:
            escaped = True
            break
    samples.append((q, v))

    return PhaseOrbit(
        float(w1), float(w2), np.array(samples), connected, float(best),
        float(resid), float(max(escale, 1e-300)), escaped,
    )


# --------------------------------------------------------------------------
# profile equation with reversal memory


def wave_profile_slope(P, r, m: ModelParams):
    """Spatial slope of the co-moving density profile (see module doc).

    Accepts scalars or arrays.  Raises SingularityError when the balance
    slope vanishes (a fold of the balance curve) anywhere in the input,
    since the profile equation degenerates there.
    """
    arr = np.asarray(P, dtype=float)
    lam = m.turning.value(arr)
    lam_p = m.turning.derivative(arr)
    gam = m.aging.value(arr)
    denom = 2.0 * (lam - arr * lam_p)
    scale = np.maximum(np.abs(lam), 1.0)
    if np.any(np.abs(denom) < 1e-12 * scale):
        raise SingularityError(
            "profile slope evaluated at a fold of the balance curve"
        )
    numer = lam * (arr * (lam + gam) - lam * gam * r)
    out = numer / denom
    if np.ndim(P) == 0:
        return float(out)
    return out


def reachable_values(rho, m: ModelParams, branches=None, rho_max=5.0):
    """Densities on other increasing branches sharing rho's balance value."""
    if branches is None:
        branches = admissible_branches(m, rho_max)
    curves = m.curves
    level = float(curves.balance(rho))
    here = _branch_of(branches, rho)
    out = []
    for br in branches:
        if here is not None and br.index == here.index:
            continue
        if br.balance_lo < level < br.balance_hi:
            out.append(_invert_balance(curves, br, level))
    return out


def jump_partner(P, r, m: ModelParams, branches=None, rho_max=5.0):
    """Density the profile jumps to from P, conserving the balance value.

    The partner lies on a different increasing branch, carries the same
    balance value (so the refractory fraction B is continuous across the
    jump) and has the opposite sign of the slope indicator B - fraction,
    so the profile switches between growing and decaying arcs.
    """
    if branches is None:
        branches = admissible_branches(m, rho_max)
    here = _branch_of(branches, P)
    if here is None:
        raise UsageError(f"density {P} is not on an increasing balance branch")
    curves = m.curves
    level = float(curves.balance(P))
    sign_here = math.copysign(
        1.0, level / r - float(curves.reversible_fraction(P))
    )
    candidates = []
    for br in branches:
        if br.index == here.index:
            continue
        if br.balance_lo < level < br.balance_hi:
            cand = _invert_balance(curves, br, level)
            sign_there = math.copysign(
                1.0, level / r - float(curves.reversible_fraction(cand))
            )
            candidates.append((cand, sign_there))
    opposite = [c for c, s in candidates if s * sign_here < 0.0]
    if opposite:
        return min(opposite, key=lambda c: abs(c - P))
    if candidates:
        raise ReachabilityError(
            f"densities {[c for c, _ in candidates]} share the balance value "
            f"of {P} but none reverses the arc direction at r={r}"
        )
    raise ReachabilityError(
        f"no other increasing branch carries the balance value of {P}"
    )


@dataclass(frozen=True)
class WaveBounds:
    """A-priori bounds on admissible wave profiles."""

    density_lo: float
    density_hi: float
    fraction_lo: float
    fraction_hi: float


def wave_bounds(m: ModelParams, rho_scan=5.0) -> WaveBounds:
    """Density and refractory-fraction bounds for admissible waves.

    Profile values cannot cross balance-curve folds except by jumping, and
    jumps conserve the balance value; so the profile is confined between
    the lowest and highest densities reachable from the folds.  The
    refractory fraction is confined between the extremes of
    aging/(aging+turning).
    """
    branches = admissible_branches(m, rho_scan)
    maxima = [br.hi for br in branches if br.hi < rho_scan]
    minima = [br.lo for br in branches if br.lo > 0.0]
    if not maxima and not minima:
        raise UsageError(
            "balance curve is monotone on the scanned range; no plateau "
            "waves exist"
        )
    highs, lows = [], []
    for rho in maxima:
        highs.append(max([rho] + reachable_values(rho, m, branches)))
    for rho in minima:
        lows.append(min([rho] + reachable_values(rho, m, branches)))
    density_hi = max(highs) if highs else rho_scan
    density_lo = min(lows) if lows else 0.0

    grid = np.linspace(0.0, rho_scan, 4097)
    frac = m.curves.reversible_fraction(grid)
    return WaveBounds(
        float(density_lo), float(density_hi), float(frac.min()), float(frac.max())
    )


# --------------------------------------------------------------------------
# admissible waves


@dataclass(frozen=True)
class Segment:
    """One monotone arc of the wave profile."""

    xi_start: float
    xi_end: float
    branch: int
    xi_samples: np.ndarray
    P_samples: np.ndarray


@dataclass(frozen=True)
class AdmissibleWave:
    """Periodic co-moving wave profile.

    ``P`` is the right-moving family density sampled on the uniform grid
    ``xi`` over one period; ``B`` is the refractory fraction of the
    opposing family in this frame, equal to balance(P)/r everywhere
    (continuous across jumps by construction).  ``segments`` hold the
    monotone arcs with their own dense samples; ``jump_points`` are
    (position, left value, right value).  ``mass`` is the mean of P over
    the period.
    """

    r: float
    period: float
    xi: np.ndarray
    P: np.ndarray
    B: np.ndarray
    segments: tuple
    jump_points: tuple
    mass: float
    meta: dict = field(default_factory=dict)

    def sample_P(self, xi_query):
        """Profile values at arbitrary positions (periodic, jump-aware)."""
        q = np.mod(np.asarray(xi_query, dtype=float), self.period)
        out = np.empty_like(q)
        filled = np.zeros(q.shape, dtype=bool)
        for seg in self.segments:
            mask = (q >= seg.xi_start) & (q < seg.xi_end) & ~filled
            if np.any(mask):
                out[mask] = np.interp(q[mask], seg.xi_samples, seg.P_samples)
                filled[mask] = True
        out[~filled] = self.P[0] if len(self.P) else 0.0
        return out if np.ndim(xi_query) else float(out)

    def to_dict(self):
        return {
            "r": self.r,
            "period": self.period,
            "mass": self.mass,
            "xi": self.xi.tolist(),
            "P": self.P.tolist(),
            "B": self.B.tolist(),
            "jump_points": [list(jp) for jp in self.jump_points],
            "segments": [
                {
                    "xi_start": seg.xi_start,
                    "xi_end": seg.xi_end,
                    "branch": seg.branch,
                    "xi_samples": seg.xi_samples.tolist(),
                    "P_samples": seg.P_samples.tolist(),
                }
                for seg in self.segments
            ],
            "meta": self.meta,
        }

    @staticmethod
    def from_dict(data):
        segments = tuple(
            Segment(
                s["xi_start"], s["xi_end"], s["branch"],
                np.asarray(s["xi_samples"]), np.asarray(s["P_samples"]),
            )
            for s in data["segments"]
        )
        return AdmissibleWave(
            data["r"], data["period"], np.asarray(data["xi"]),
            np.asarray(data["P"]), np.asarray(data["B"]), segments,
            tuple(tuple(jp) for jp in data["jump_points"]),
            data["mass"], data.get("meta", {}),
        )


class _DegenerateCase(Exception):
    """Internal: both arc densities are stagnation points at this r."""

    def __init__(self, rho_star, rho_star2):
        super().__init__("degenerate piecewise-constant wave")
        self.rho_star = rho_star
        self.rho_star2 = rho_star2


def _cumulative_simpson(f, h):
    """Cumulative integral at even sample indices of an odd-length array."""
    inc = (f[0:-1:2] + 4.0 * f[1::2] + f[2::2]) * (h / 3.0)
    return np.concatenate([[0.0], np.cumsum(inc)])


def _integrate_arc(m, r, p_from, p_to, n=2048):
    """xi(P) and the mass integral along one monotone arc.

    The traversal time is a pure quadrature int dP / P'(P), so it is
    evaluated by composite Simpson on a fine density grid; the integrand
    vanishes smoothly at folds of the balance curve (the profile shoots
    through them instantaneously), so only stagnation densities need to be
    kept outside the arc.  Returns (P at even samples, xi at even samples
    increasing from 0, duration, integral of P dxi).
    """
    p = np.linspace(p_from, p_to, 2 * n + 1)
    h = (p_to - p_from) / (2 * n)
    slope = wave_profile_slope(p, r, m)
    if np.any(slope == 0.0) or np.any(~np.isfinite(slope)):
        raise ConstructionError(
            "profile slope vanished inside an arc; the arc touches a "
            "stagnation density"
        )
    f = 1.0 / slope
    xi = _cumulative_simpson(f, h)
    mass = _cumulative_simpson(p * f, h)[-1]
    if xi[-1] <= 0.0 or np.any(np.diff(xi) <= 0.0):
        raise ConstructionError(
            "arc traversal time is not increasing; the requested arc is "
            "not a single monotone piece of the profile"
        )
    return p[::2], xi, float(xi[-1]), float(mass)


def construct_admissible_wave(m: ModelParams, target_mass=None, r=None,
                              xi1=None, xi2=None, n_samples=4096,
                              rho_scan=5.0, trough_range=None,
                              force_generic=False) -> AdmissibleWave:
    """Build a periodic two-arc wave profile.

    Exactly one of ``target_mass`` (mean of P over the period) and ``r``
    (the balance value) pins the amplitude.  For the ramp-step turning
    rate with constant aging and given switch positions ``xi1 < xi2``, the
    profile is assembled from its exact exponential arcs; all other inputs
    take the generic route, which integrates the profile equation along a
    crest arc and a trough arc and determines the period from the
    dynamics.  ``trough_range`` optionally pins the trough arc's density
    range (mainly for cross-checking the two routes against each other).
    """
    if (target_mass is None) == (r is None):
        raise ParameterError("give exactly one of target_mass and r")
    closed_form_ready = (
        isinstance(m.turning, PiecewiseLinearStep)
        and isinstance(m.aging, Constant)
        and xi1 is not None
        and xi2 is not None
    )
    if closed_form_ready and not force_generic:
        return _construct_closed_form(m, target_mass, r, xi1, xi2, n_samples)
    if (xi1 is not None or xi2 is not None) and not closed_form_ready:
        raise ParameterError(
            "switch positions can only be prescribed for the ramp-step "
            "turning rate with constant aging (the generic route determines "
            "them from the dynamics)"
        )
    return _construct_generic(
        m, target_mass, r, n_samples, rho_scan, trough_range
    )


# ---- closed form ----------------------------------------------------------


def _closed_form_profile(lam_lo, lam_hi, gam, xi1, xi2):
    """Unit-amplitude arc data of the ramp-step wave.

    Both arcs are exponentials relaxing away from their stagnation values;
    whole-profile periodicity fixes the crest start value.  Everything
    scales linearly with the balance value r, so this is computed once at
    r = 1.
    """
    q = lam_lo / lam_hi
    k_c = 0.5 * (gam + lam_hi)
    k_t = 0.5 * (gam + lam_lo)
    c_inf = gam * lam_hi / (gam + lam_hi)
    t_inf = gam * lam_lo / (gam + lam_lo)
    if k_c * xi1 > 500.0 or k_t * (xi2 - xi1) > 500.0:
        raise ConstructionError("switch interval too long; arcs overflow")
    e_c = math.exp(k_c * xi1)
    e_t = math.exp(k_t * (xi2 - xi1))
    p_c0 = (t_inf * (1.0 - e_t) + q * c_inf * e_t * (1.0 - e_c)) / (
        q * (1.0 - e_c * e_t)
    )
    p_c_end = c_inf + (p_c0 - c_inf) * e_c
    p_t0 = q * p_c_end
    p_t_end = t_inf + (p_t0 - t_inf) * e_t
    if abs(p_t_end - q * p_c0) > 1e-9 * max(1.0, p_c0):
        raise ConsistencyError(
            "closed-form arcs do not close into a periodic profile"
        )
    mass = (
        c_inf * xi1
        + (p_c0 - c_inf) * (e_c - 1.0) / k_c
        + t_inf * (xi2 - xi1)
        + (p_t0 - t_inf) * (e_t - 1.0) / k_t
    ) / xi2
    return {
        "q": q, "k_c": k_c, "k_t": k_t, "c_inf": c_inf, "t_inf": t_inf,
        "p_c0": p_c0, "p_c_end": p_c_end, "p_t0": p_t0, "p_t_end": p_t_end,
        "mass": mass,
    }


def _construct_closed_form(m, target_mass, r, xi1, xi2, n_samples):
    lam = m.turning
    gam = m.aging.level
    lam_lo, lam_hi, eps = lam.lam_lo, lam.lam_hi, lam.eps
    if eps >= (lam_hi - lam_lo) / (lam_hi + lam_lo):
        raise NoWaveError(
            "ramp half-width eps must stay below "
            "(lam_hi - lam_lo)/(lam_hi + lam_lo) for plateau waves to exist"
        )
    if not 0.0 < xi1 < xi2:
        raise ParameterError("need 0 < xi1 < xi2")

    unit = _closed_form_profile(lam_lo, lam_hi, gam, xi1, xi2)
    if r is None:
        r = target_mass / unit["mass"]
    mass = r * unit["mass"]

    # admissibility: the crest arc must stay above the ramp, the trough below
    crest_lo = r * unit["p_c0"]
    trough_hi = r * unit["p_t0"]
    if crest_lo < 1.0 + eps - 1e-12 or trough_hi > 1.0 - eps + 1e-12:
        raise ConstructionError(
            f"arcs cross the turning-rate ramp: crest starts at "
            f"{crest_lo:.6g} (needs >= {1 + eps}) and trough at "
            f"{trough_hi:.6g} (needs <= {1 - eps}); adjust mass or switch "
            f"positions"
        )

    period = float(xi2)

    def crest(x):
        return r * (unit["c_inf"] + (unit["p_c0"] - unit["c_inf"])
                    * np.exp(unit["k_c"] * x))

    def trough(x):
        return r * (unit["t_inf"] + (unit["p_t0"] - unit["t_inf"])
                    * np.exp(unit["k_t"] * (x - xi1)))

    xi = np.arange(n_samples) * (period / n_samples)
    crest_mask = xi < xi1
    p = np.empty(n_samples)
    p[crest_mask] = crest(xi[crest_mask])
    p[~crest_mask] = trough(xi[~crest_mask])
    curves = m.curves
    b = curves.balance(p) / r

    n_dense = 4097
    xi_crest = np.linspace(0.0, xi1, n_dense)
    p_crest = crest(xi_crest)
    xi_trough = np.linspace(xi1, xi2, n_dense)
    p_trough = trough(xi_trough)
    branches = admissible_branches(m, max(5.0, float(p_crest.max()) * 1.5))
    crest_branch = _branch_of(branches, float(p_crest[0]))
    trough_branch = _branch_of(branches, float(p_trough[-1]))
    segments = (
        Segment(0.0, float(xi1), crest_branch.index if crest_branch else -1,
                xi_crest, p_crest),
        Segment(float(xi1), period, trough_branch.index if trough_branch else -1,
                xi_trough, p_trough),
    )
    jumps = (
        (float(xi1), float(p_crest[-1]), float(p_trough[0])),
        (period, float(p_trough[-1]), float(p_crest[0])),
    )
    meta = {
        "path": "closed_form",
        "stagnation_crest": r * unit["c_inf"],
        "stagnation_trough": r * unit["t_inf"],
    }
    return AdmissibleWave(float(r), period, xi, p, np.asarray(b), segments,
                          jumps, float(mass), meta)


# ---- generic route --------------------------------------------------------


def _generic_at_r(m, r, branches, bi, bj, trough_range, n_samples):
    """Two-arc wave at a fixed balance value (trough on bi, crest on bj).

    Raises _DegenerateCase when both candidate densities are stagnation
    points, and ConstructionError when no decaying trough arc with a
    growing crest image exists on this branch pair.
    """
    curves = m.curves

    def sigma(rho):
        # positive where the profile decays (B below the local fraction)
        return float(curves.reversible_fraction(rho) - curves.balance(rho) / r)

    lo = max(bi.balance_lo, bj.balance_lo)
    hi = min(bi.balance_hi, bj.balance_hi)
    if hi <= lo:
        raise ConstructionError("branches share no balance range")
    inset = 1e-9 * (hi - lo)
    a = _invert_balance(curves, bi, lo + inset)
    b = _invert_balance(curves, bi, hi - inset)

    grid = np.linspace(a, b, 513)
    bal_grid = np.asarray(curves.balance(grid))
    sig = np.asarray(curves.reversible_fraction(grid)) - bal_grid / r
    flips = np.nonzero(np.sign(sig[:-1]) * np.sign(sig[1:]) < 0)[0]
    rho_star = None
    if len(flips):
        ia = flips[0]
        xa, xb, fa = grid[ia], grid[ia + 1], sig[ia]
        for _ in range(100):
            mid = 0.5 * (xa + xb)
            fm = sigma(mid)
            if fa * fm <= 0.0:
                xb = mid
            else:
                xa, fa = mid, fm
        rho_star = 0.5 * (xa + xb)
        rho_star2 = _invert_balance(curves, bj, float(curves.balance(rho_star)))
        if abs(sigma(rho_star2)) < 1e-9:
            raise _DegenerateCase(rho_star, rho_star2)

    def usable(rho):
        """Trough density with a crest image on a growing arc."""
        if sigma(rho) <= 0.0:
            return False
        lvl = float(curves.balance(rho))
        if not bj.balance_lo < lvl < bj.balance_hi:
            return False
        return sigma(_invert_balance(curves, bj, lvl)) < 0.0

    if trough_range is not None:
        t_lo, t_hi = sorted(float(x) for x in trough_range)
        if not (bi.lo <= t_lo and t_hi <= bi.hi):
            raise ConstructionError(
                "prescribed trough range leaves the lower balance branch"
            )
        for endpoint in (t_lo, t_hi):
            if not usable(endpoint):
                raise ConstructionError(
                    f"prescribed trough density {endpoint} does not give a "
                    f"decaying arc with a growing crest image at r={r:.6g}"
                )
    else:
        ok = np.zeros(len(grid), dtype=bool)
        in_range = (bal_grid > bj.balance_lo) & (bal_grid < bj.balance_hi)
        if in_range.any():
            images = _invert_balance(curves, bj, bal_grid[in_range])
            sig_img = (np.asarray(curves.reversible_fraction(images))
                       - np.asarray(curves.balance(images)) / r)
            ok[in_range] = (sig[in_range] > 0.0) & (sig_img < 0.0)
        if not ok.any():
            raise ConstructionError(
                f"no decaying trough arc with a growing crest image exists "
                f"on this branch pair at r={r:.6g}"
            )
        # longest contiguous usable run
        best_start = best_len = 0
        run_start = None
        padded = np.concatenate([ok, [False]])
        for idx, val in enumerate(padded):
            if val and run_start is None:
                run_start = idx
            elif not val and run_start is not None:
                if idx - run_start > best_len:
                    best_start, best_len = run_start, idx - run_start
                run_start = None
        lo_edge = grid[best_start]
        hi_edge = grid[best_start + best_len - 1]
        # refine edges against their unusable neighbours where they exist
        # (to ~1e-9 of the grid spacing; the margins below dwarf this)
        if best_start > 0:
            xa, xb = grid[best_start - 1], lo_edge
            for _ in range(30):
                mid = 0.5 * (xa + xb)
                if usable(mid):
                    xb = mid
                else:
                    xa = mid
            lo_edge = xb
        if best_start + best_len < len(grid):
            xa, xb = hi_edge, grid[best_start + best_len]
            for _ in range(30):
                mid = 0.5 * (xa + xb)
                if usable(mid):
                    xa = mid
                else:
                    xb = mid
            hi_edge = xa
        length = hi_edge - lo_edge
        if length <= 0.0:
            raise ConstructionError("usable trough region has zero width")
        margin = 0.08 * length
        t_lo, t_hi = lo_edge + margin, hi_edge - margin

    j_a = _invert_balance(curves, bj, float(curves.balance(t_lo)))
    j_b = _invert_balance(curves, bj, float(curves.balance(t_hi)))

    p_crest, xi_crest, dur_crest, mass_crest = _integrate_arc(m, r, j_a, j_b)
    p_trough, xi_trough, dur_trough, mass_trough = _integrate_arc(m, r, t_hi, t_lo)

    period = dur_crest + dur_trough
    mass = (mass_crest + mass_trough) / period

    xi = np.arange(n_samples) * (period / n_samples)
    p = np.empty(n_samples)
    crest_mask = xi < dur_crest
    p[crest_mask] = np.interp(xi[crest_mask], xi_crest, p_crest)
    p[~crest_mask] = np.interp(xi[~crest_mask] - dur_crest, xi_trough, p_trough)
    b_prof = curves.balance(p) / r

    segments = (
        Segment(0.0, dur_crest, bj.index, xi_crest, p_crest),
        Segment(dur_crest, period, bi.index, xi_trough + dur_crest, p_trough),
    )
    jumps = (
        (dur_crest, float(j_b), float(t_hi)),
        (period, float(t_lo), float(j_a)),
    )
    for _, left, right in jumps:
        if abs(float(curves.balance(left)) - float(curves.balance(right))) > 1e-7:
            raise ConsistencyError(
                "balance value is not conserved across a constructed jump"
            )
    meta = {
        "path": "generic",
        "rho_star": rho_star,
        "branches": (bi.index, bj.index),
        "trough_range": (float(t_lo), float(t_hi)),
    }
    return AdmissibleWave(float(r), float(period), xi, p, np.asarray(b_prof),
                          segments, jumps, float(mass), meta)


def _degenerate_wave(m, r, rho_star, rho_star2, target_mass, n_samples):
    """Piecewise-constant wave when both densities are stagnation points."""
    curves = m.curves
    lo, hi = sorted((rho_star, rho_star2))
    if target_mass is not None:
        crest_frac = (target_mass - lo) / (hi - lo)
        if not 0.0 < crest_frac < 1.0:
            raise ConstructionError(
                f"target mass {target_mass} outside the plateau range "
                f"({lo:.6g}, {hi:.6g}) of the degenerate wave"
            )
    else:
        crest_frac = 0.5
    period = 1.0
    xi_switch = crest_frac * period
    xi = np.arange(n_samples) * (period / n_samples)
    p = np.where(xi < xi_switch, hi, lo)
    b_prof = curves.balance(p) / r
    mass = crest_frac * hi + (1.0 - crest_frac) * lo
    n_dense = 129
    segments = (
        Segment(0.0, xi_switch, -1, np.linspace(0.0, xi_switch, n_dense),
                np.full(n_dense, hi)),
        Segment(xi_switch, period, -1, np.linspace(xi_switch, period, n_dense),
                np.full(n_dense, lo)),
    )
    jumps = ((xi_switch, hi, lo), (period, lo, hi))
    meta = {"path": "degenerate", "rho_star": rho_star, "rho_star2": rho_star2}
    return AdmissibleWave(float(r), period, xi, p, np.asarray(b_prof),
                          segments, jumps, float(mass), meta)


def _r_window(curves, bi, bj):
    """Balance-value window on a branch pair.

    A two-arc wave needs a trough density whose arc decays
    (balance/fraction < r there) while its crest image grows
    (balance/fraction > r there), and the refractory fraction must stay
    below 1, i.e. r > balance at the top of the trough interval.  The
    window therefore runs from the larger of that cap and the smallest
    balance/fraction ratio on the trough interval up to the largest ratio
    on the crest interval.
    """
    lo = max(bi.balance_lo, bj.balance_lo)
    hi = min(bi.balance_hi, bj.balance_hi)
    if hi <= lo:
        return None
    inset = 1e-9 * (hi - lo)
    levels = np.linspace(lo + inset, hi - inset, 513)
    trough = _invert_balance(curves, bi, levels)
    crest = _invert_balance(curves, bj, levels)

    def ratio(rho):
        return curves.balance(rho) / curves.reversible_fraction(rho)

    r_lo = max(float(ratio(trough).min()), float(curves.balance(trough[-1])))
    r_hi = float(ratio(crest).max())
    if r_hi <= r_lo:
        return None
    return r_lo, r_hi


def _construct_generic(m, target_mass, r, n_samples, rho_scan, trough_range):
    branches = admissible_branches(m, rho_scan)
    if len(branches) < 2:
        raise NoWaveError(
            "balance curve has a single increasing branch; no jumps are "
            "possible"
        )
    curves = m.curves

    last_error = None
    for i in range(len(branches)):
        for j in range(i + 1, len(branches)):
            bi, bj = branches[i], branches[j]
            window = _r_window(curves, bi, bj)
            if window is None:
                continue
            r_lo, r_hi = window
            try:
                if r is not None:
                    try:
                        return _generic_at_r(
                            m, r, branches, bi, bj, trough_range, n_samples
                        )
                    except _DegenerateCase as deg:
                        return _degenerate_wave(
                            m, r, deg.rho_star, deg.rho_star2, target_mass,
                            n_samples,
                        )
                return _calibrate_mass(
                    m, target_mass, branches, bi, bj, r_lo, r_hi,
                    trough_range, n_samples,
                )
            except ConstructionError as exc:
                last_error = exc
                continue
    if last_error is not None:
        raise last_error
    raise NoWaveError(
        "no pair of increasing branches shares a balance range; the model "
        "admits no two-plateau waves"
    )


def _calibrate_mass(m, target_mass, branches, bi, bj, r_lo, r_hi,
                    trough_range, n_samples):
    width = r_hi - r_lo

    def wave_at(r_try, n=257):
        try:
            return _generic_at_r(m, r_try, branches, bi, bj, trough_range, n)
        except _DegenerateCase as deg:
            return _degenerate_wave(
                m, r_try, deg.rho_star, deg.rho_star2, target_mass, n
            )

    # find working endpoints, tightening inwards when the extremes fail
    lo_wave = hi_wave = None
    shrink_lo = 1e-3
    for _ in range(10):
        try:
            lo_wave = wave_at(r_lo + shrink_lo * width)
            break
        except ConstructionError:
            shrink_lo *= 2.0
    shrink_hi = 1e-3
    for _ in range(10):
        try:
            hi_wave = wave_at(r_hi - shrink_hi * width)
            break
        except ConstructionError:
            shrink_hi *= 2.0
    if lo_wave is None or hi_wave is None:
        raise ConstructionError(
            "could not evaluate the admissible balance window; no wave "
            "constructed"
        )
    mass_lo, mass_hi = lo_wave.mass, hi_wave.mass
    if not min(mass_lo, mass_hi) <= target_mass <= max(mass_lo, mass_hi):
        raise ConstructionError(
            f"target mass {target_mass} outside the achievable range "
            f"[{min(mass_lo, mass_hi):.6g}, {max(mass_lo, mass_hi):.6g}] "
            f"on this branch pair"
        )
    r_a = r_lo + shrink_lo * width
    r_b = r_hi - shrink_hi * width
    increasing = mass_hi > mass_lo
    r_mid = 0.5 * (r_a + r_b)
    for _ in range(60):
        r_mid = 0.5 * (r_a + r_b)
        w_mid = wave_at(r_mid)
        if abs(w_mid.mass - target_mass) < 1e-10 * max(1.0, abs(target_mass)):
            break
        if (w_mid.mass < target_mass) == increasing:
            r_a = r_mid
        else:
            r_b = r_mid
    return wave_at(r_mid, n_samples)
