"""Finite-volume solver for the reversal model on a periodic domain.

The four densities (right-movers u, left-movers v, and their refractory
sub-densities u1 <= u, v1 <= v) are advected at unit speed and coupled by
pointwise reversal and aging terms.  Transport and reaction are split per
step: transport uses first-order upwind differencing, which at the default
time step (Courant number 0.99) is nearly exact shifting, and reaction
uses explicit Euler (or one RK4 stage per step on request).  The reversal
exchange is applied with exactly opposite signs to u and v, so total mass
is conserved to round-off regardless of step size.

The memory-free variant (u1 and v1 absent, reversal at the full rates
``turning(u) v - turning(v) u``) is selected simply by constructing a
:class:`FieldState` without refractory fields.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError, ConfigError, ParameterError
from .model import ModelParams

__all__ = [
    "Grid",
    "FieldState",
    "SimConfig",
    "SimResult",
    "initial_condition",
    "step",
    "simulate",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [0, length)."""

    n_cells: int
    length: float = 1.0

    def __post_init__(self):
        if self.n_cells < 16:
            raise ConfigError("need at least 16 cells")
        if self.length <= 0:
            raise ConfigError("domain length must be positive")

    @property
    def dx(self):
        return self.length / self.n_cells

    @property
    def x(self):
        """Cell centres."""
        return (np.arange(self.n_cells) + 0.5) * self.dx


@dataclass(frozen=True)
class FieldState:
    """Cell-averaged densities at one instant.

    ``u1`` and ``v1`` are None for the memory-free variant.
    """

    grid: Grid
    u: np.ndarray
    v: np.ndarray
    u1: np.ndarray | None = None
    v1: np.ndarray | None = None
    t: float = 0.0

    def __post_init__(self):
        n = self.grid.n_cells
        for name in ("u", "v", "u1", "v1"):
            arr = getattr(self, name)
            if arr is None:
                continue
            if arr.shape != (n,):
                raise ConfigError(f"{name} has shape {arr.shape}, expected ({n},)")
        if (self.u1 is None) != (self.v1 is None):
            raise ConfigError("u1 and v1 must be given together or not at all")

    @property
    def memory_free(self):
        return self.u1 is None

    @property
    def total_mass(self):
        return float((self.u + self.v).sum() * self.grid.dx)

    def copy(self):
        return FieldState(
            self.grid, self.u.copy(), self.v.copy(),
            None if self.u1 is None else self.u1.copy(),
            None if self.v1 is None else self.v1.copy(),
            self.t,
        )


@dataclass(frozen=True)
class SimConfig:
    """Time-stepping parameters.

    ``dt`` defaults to 0.99 dx.  The transport stability limit dt <= dx is
    enforced unless ``allow_unsafe_dt`` is set, which downgrades it to a
    warning (useful for reproducing published runs specified with slightly
    different step conventions); the diffusion limit, when smoothing is on,
    is always enforced.
    """

    dt: float | None = None
    t_end: float = 10.0
    diffusion_eps: float = 0.0
    scheme: str = "splitting_euler"
    snapshot_every: int = 0
    allow_unsafe_dt: bool = False

    def __post_init__(self):
        if self.scheme not in ("splitting_euler", "splitting_rk4_reaction"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.t_end <= 0:
            raise ConfigError("t_end must be positive")
        if self.diffusion_eps < 0:
            raise ConfigError("diffusion_eps must be non-negative")

    def resolved_dt(self, grid: Grid):
        dx = grid.dx
        dt = 0.99 * dx if self.dt is None else self.dt
        if dt <= 0:
            raise ConfigError("dt must be positive")
        if dt > dx * (1.0 + 1e-12):
            if not self.allow_unsafe_dt:
                raise ConfigError(
                    f"dt={dt} exceeds the transport limit dx={dx}; reduce dt "
                    f"or set allow_unsafe_dt"
                )
            warnings.warn(
                f"dt={dt} exceeds the transport limit dx={dx}; proceeding "
                f"because allow_unsafe_dt is set",
                stacklevel=2,
            )
        if self.diffusion_eps > 0:
            limit = dx * dx / (2.0 * self.diffusion_eps**2)
            if dt > limit:
                raise ConfigError(
                    f"dt={dt} exceeds the smoothing limit {limit:.3g} for "
                    f"diffusion_eps={self.diffusion_eps}"
                )
        return dt


@dataclass(frozen=True)
class SimResult:
    """Output of :func:`simulate`."""

    snapshots: list
    final: FieldState
    times: np.ndarray
    mass_drift: float
    min_density: float
    steps: int
    config: SimConfig = field(repr=False, default=None)


def _advect(arr, courant, direction):
    """One upwind transport step at the given Courant number.

    direction +1 moves mass towards larger x, -1 towards smaller x; at
    courant == 1 this is an exact one-cell roll.
    """
    if direction > 0:
        return (1.0 - courant) * arr + courant * np.roll(arr, 1)
    return (1.0 - courant) * arr + courant * np.roll(arr, -1)


def _reaction_rates(m: ModelParams, u, v, u1, v1):
    """Right-hand sides of the reaction part (du, dv, du1, dv1)."""
    lam_u = m.turning.value(u)
    lam_v = m.turning.value(v)
    if u1 is None:
        f = lam_u * v - lam_v * u
        return f, -f, None, None
    f = lam_u * v1 - lam_v * u1
    gam_u = m.aging.value(u)
    gam_v = m.aging.value(v)
    du1 = gam_v * (u - u1) - lam_v * u1
    dv1 = gam_u * (v - v1) - lam_u * v1
    return f, -f, du1, dv1


def _react(m, u, v, u1, v1, dt, scheme):
    if scheme == "splitting_euler":
        du, dv, du1, dv1 = _reaction_rates(m, u, v, u1, v1)
        u = u + dt * du
        v = v + dt * dv
        if u1 is not None:
            u1 = u1 + dt * du1
            v1 = v1 + dt * dv1
        return u, v, u1, v1

    # one classical RK4 stage for the (local, stiff-ish) reaction part
    def rhs(y):
        return _reaction_rates(m, *y)

    y = (u, v, u1, v1)
    k1 = rhs(y)
    k2 = rhs(_axpy(y, k1, 0.5 * dt))
    k3 = rhs(_axpy(y, k2, 0.5 * dt))
    k4 = rhs(_axpy(y, k3, dt))
    out = []
    for i in range(4):
        if y[i] is None:
            out.append(None)
        else:
            out.append(
                y[i] + (dt / 6.0) * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i])
            )
    return tuple(out)


def _axpy(y, k, a):
    return tuple(
        None if y[i] is None else y[i] + a * k[i] for i in range(4)
    )


def _smooth(arr, coeff):
    return arr + coeff * (np.roll(arr, 1) - 2.0 * arr + np.roll(arr, -1))


def _check_positive(state_arrays, t, dx):
    for arr in state_arrays:
        if arr is None:
            continue
        if not np.all(np.isfinite(arr)):
            cell = int(np.argmin(np.isfinite(arr)))
            raise BlowUpError(
                "solution lost finiteness", cell=cell, time=t
            )
        lowest = arr.min()
        if lowest < -1e-9:
            cell = int(arr.argmin())
            raise BlowUpError(
                f"density fell to {lowest:.3e}", cell=cell, time=t
            )
        np.clip(arr, 0.0, None, out=arr)


def step(state: FieldState, m: ModelParams, dt, scheme="splitting_euler",
         diffusion_eps=0.0) -> FieldState:
    """Advance one split step (transport then reaction); returns a new state."""
    grid = state.grid
    courant = dt / grid.dx
    u = _advect(state.u, courant, +1)
    v = _advect(state.v, courant, -1)
    u1 = None if state.u1 is None else _advect(state.u1, courant, +1)
    v1 = None if state.v1 is None else _advect(state.v1, courant, -1)
    u, v, u1, v1 = _react(m, u, v, u1, v1, dt, scheme)
    if diffusion_eps > 0.0:
        coeff = diffusion_eps**2 * dt / grid.dx**2
        u = _smooth(u, coeff)
        v = _smooth(v, coeff)
        if u1 is not None:
            u1 = _smooth(u1, coeff)
            v1 = _smooth(v1, coeff)
    _check_positive([u, v, u1, v1], state.t + dt, grid.dx)
    return FieldState(grid, u, v, u1, v1, state.t + dt)


def simulate(state: FieldState, m: ModelParams, config: SimConfig) -> SimResult:
    """Run the solver to ``t_end``, collecting snapshots.

    Snapshots are taken every ``snapshot_every`` steps (0 keeps only the
    initial and final states).  The last step is shortened to land exactly
    on ``t_end``.
    """
    grid = state.grid
    dt = config.resolved_dt(grid)
    n_steps = int(np.ceil(config.t_end / dt - 1e-12))

    mass0 = state.total_mass
    current = state.copy()
    _check_positive([current.u, current.v, current.u1, current.v1],
                    current.t, grid.dx)
    snapshots = [current]
    times = [current.t]
    min_density = float(
        min(current.u.min(), current.v.min())
    )

    u, v = current.u.copy(), current.v.copy()
    u1 = None if current.u1 is None else current.u1.copy()
    v1 = None if current.v1 is None else current.v1.copy()
    t = current.t
    courant = dt / grid.dx
    smooth_coeff = (
        config.diffusion_eps**2 * dt / grid.dx**2
        if config.diffusion_eps > 0.0 else 0.0
    )

    for k in range(1, n_steps + 1):
        step_dt = dt
        step_courant = courant
        if k == n_steps:
            step_dt = config.t_end - (k - 1) * dt
            step_courant = step_dt / grid.dx
        u = _advect(u, step_courant, +1)
        v = _advect(v, step_courant, -1)
        if u1 is not None:
            u1 = _advect(u1, step_courant, +1)
            v1 = _advect(v1, step_courant, -1)
        u, v, u1, v1 = _react(m, u, v, u1, v1, step_dt, config.scheme)
        if smooth_coeff > 0.0:
            u = _smooth(u, smooth_coeff)
            v = _smooth(v, smooth_coeff)
            if u1 is not None:
                u1 = _smooth(u1, smooth_coeff)
                v1 = _smooth(v1, smooth_coeff)
        t += step_dt
        _check_positive([u, v, u1, v1], t, grid.dx)
        low = min(u.min(), v.min())
        if low < min_density:
            min_density = float(low)
        if config.snapshot_every and (k % config.snapshot_every == 0 or k == n_steps):
            snap = FieldState(
                grid, u.copy(), v.copy(),
                None if u1 is None else u1.copy(),
                None if v1 is None else v1.copy(), t,
            )
            snapshots.append(snap)
            times.append(t)

    final = FieldState(grid, u, v, u1, v1, t)
    if not config.snapshot_every:
        snapshots.append(final)
        times.append(t)
    elif snapshots[-1].t != t:
        snapshots.append(final)
        times.append(t)
    mass_drift = abs(final.total_mass - mass0)
    return SimResult(snapshots, final, np.asarray(times), mass_drift,
                     min_density, n_steps, config)


# --------------------------------------------------------------------------
# initial conditions


def initial_condition(kind, grid: Grid, m: ModelParams, amplitude=0.1,
                      wavenumber=1, memory=True, seed=None, path=None,
                      plateau_values=None) -> FieldState:
    """Standard starting states.

    kinds:
      ``isotropic_plus_sine``    zero-mean sine on the direction imbalance;
                                 total density stays uniform, refractory
                                 fractions start at their relaxed values.
      ``isotropic_plus_cosine_pair``  in-phase cosine added to both u and v,
                                 perturbing the total density instead.
      ``step_profile``           square wave between two plateau values in
                                 u, with v the same pattern shifted by a
                                 quarter domain.
      ``random``                 seeded uniform perturbation of both
                                 families about the isotropic state.
      ``custom_csv``             columns x,u,v[,u1,v1] read from ``path``;
                                 row count must match the grid.
    """
    x = grid.x
    half = 0.5 * m.total_mass / grid.length  # isotropic per-family density

    if kind == "isotropic_plus_sine":
        wobble = amplitude * np.sin(2.0 * np.pi * wavenumber * x / grid.length)
        u = half * (1.0 + wobble)
        v = half * (1.0 - wobble)
    elif kind == "isotropic_plus_cosine_pair":
        wobble = amplitude * np.cos(2.0 * np.pi * wavenumber * x / grid.length)
        u = half * (1.0 + wobble)
        v = half * (1.0 + wobble)
    elif kind == "step_profile":
        lo, hi = plateau_values if plateau_values else (
            half * (1.0 - amplitude), half * (1.0 + amplitude)
        )
        pattern = np.where((x / grid.length) % 1.0 < 0.5, hi, lo)
        u = pattern.astype(float)
        v = np.roll(pattern, grid.n_cells // 4).astype(float)
    elif kind == "random":
        rng = np.random.default_rng(seed)
        u = half * (1.0 + amplitude * (2.0 * rng.random(grid.n_cells) - 1.0))
        v = half * (1.0 + amplitude * (2.0 * rng.random(grid.n_cells) - 1.0))
    elif kind == "custom_csv":
        if path is None:
            raise ParameterError("custom_csv needs a path")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape[0] != grid.n_cells:
            raise ConfigError(
                f"file has {data.shape[0]} rows, grid has {grid.n_cells} cells"
            )
        if data.shape[1] not in (3, 5):
            raise ConfigError("expected columns x,u,v or x,u,v,u1,v1")
        u, v = data[:, 1].copy(), data[:, 2].copy()
        if np.any(u < 0) or np.any(v < 0):
            raise ConfigError("densities in the file must be non-negative")
        if data.shape[1] == 5:
            u1, v1 = data[:, 3].copy(), data[:, 4].copy()
            if np.any(u1 < 0) or np.any(v1 < 0) or np.any(u1 > u) or np.any(v1 > v):
                raise ConfigError(
                    "refractory densities must satisfy 0 <= u1 <= u, "
                    "0 <= v1 <= v"
                )
            return FieldState(grid, u, v, u1, v1)
        if memory:
            u1, v1 = _relaxed_refractory(m, u, v)
            return FieldState(grid, u, v, u1, v1)
        return FieldState(grid, u, v)
    else:
        raise ParameterError(f"unknown initial condition {kind!r}")

    if not memory:
        return FieldState(grid, u, v)
    u1, v1 = _relaxed_refractory(m, u, v)
    return FieldState(grid, u, v, u1, v1)


def _relaxed_refractory(m, u, v):
    """Refractory densities at their pointwise quasi-steady values."""
    gam_u = m.aging.value(u)
    gam_v = m.aging.value(v)
    lam_u = m.turning.value(u)
    lam_v = m.turning.value(v)
    u1 = u * gam_v / (gam_v + lam_v)
    v1 = v * gam_u / (gam_u + lam_u)
    return u1, v1
