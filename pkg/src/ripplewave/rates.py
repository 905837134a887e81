"""Density-dependent rate functions.

A rate function maps a non-negative density to a positive rate.  Two of
them parameterise the reversal model: the turning (reversal) rate and the
aging (refractory-recovery) rate.  Every kind exposes

    value(rho)       -- the rate itself,
    derivative(rho)  -- one-sided derivative, taken from the right at kinks,
    integral(rho)    -- the exact antiderivative with integral(0) == 0,

all accepting scalars or numpy arrays.  Instances are immutable; altering a
parameter means building a new instance.  ``rate_from_spec`` /
``RateFunction.to_spec`` round-trip each kind through a plain JSON dict.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError

__all__ = [
    "RateFunction",
    "Constant",
    "Linear",
    "Quadratic",
    "SigmoidExp",
    "SigmoidRational",
    "PiecewiseLinearStep",
    "DoubleSigmoid",
    "TripleStep",
    "rate_from_spec",
]


def _as_rho(rho):
    """Validate and convert an argument to a float array (>= 0 everywhere)."""
    arr = np.asarray(rho, dtype=float)
    if np.any(arr < 0.0) or np.any(np.isnan(arr)):
        raise DomainError("rate functions are defined for densities >= 0")
    return arr


def _match(rho, out):
    """Return a scalar when the input was scalar, else the array."""
    if isinstance(rho, np.ndarray):
        return out
    if np.ndim(out) == 0:
        return float(out)
    return out


def _require_positive(name, value):
    if not (isinstance(value, numbers.Real) and np.isfinite(value) and value > 0):
        raise ParameterError(f"{name} must be a positive finite number, got {value!r}")


def _sigmoid(z):
    # 1/(1+exp(-z)) written via tanh so it never overflows.
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _softplus(z):
    # log(1+exp(z)), stable for large |z|.
    return np.logaddexp(0.0, z)


class RateFunction:
    """Common interface of all rate-function kinds."""

    kind = "abstract"

    def value(self, rho):
        raise NotImplementedError

    def derivative(self, rho):
        raise NotImplementedError

    def integral(self, rho):
        raise NotImplementedError

    def rescaled(self, value_scale, density_scale):
        """Return the rate w -> value_scale * value(density_scale * w).

        Used to bring dimensional rates to the scaled model.  Kinds whose
        shape is pinned to the density 1 (the sigmoid-about-1 and stepped
        kinds) only support density_scale == 1.
        """
        raise NotImplementedError

    def to_spec(self):
        """JSON-serialisable dict describing this rate function."""
        raise NotImplementedError

    def __call__(self, rho):
        return self.value(rho)


@dataclass(frozen=True)
class Constant(RateFunction):
    """rho -> level, a density-independent rate."""

    level: float
    kind = "constant"

    def __post_init__(self):
        _require_positive("level", self.level)

    def value(self, rho):
        r = _as_rho(rho)
        return _match(rho, np.full_like(r, self.level))

    def derivative(self, rho):
        r = _as_rho(rho)
        return _match(rho, np.zeros_like(r))

    def integral(self, rho):
        r = _as_rho(rho)
        return _match(rho, self.level * r)

    def rescaled(self, value_scale, density_scale):
        return Constant(self.level * value_scale)

    def to_spec(self):
        return {"kind": self.kind, "value": self.level}


@dataclass(frozen=True)
class Linear(RateFunction):
    """rho -> a + b*rho."""

    a: float
    b: float
    kind = "linear"

    def __post_init__(self):
        _require_positive("a", self.a)
        if self.b < 0:
            raise ParameterError("b must be >= 0 so the rate stays positive")

    def value(self, rho):
        r = _as_rho(rho)
        return _match(rho, self.a + self.b * r)

    def derivative(self, rho):
        r = _as_rho(rho)
        return _match(rho, np.full_like(r, self.b))

    def integral(self, rho):
        r = _as_rho(rho)
        return _match(rho, self.a * r + 0.5 * self.b * r * r)

    def rescaled(self, value_scale, density_scale):
        return Linear(self.a * value_scale, self.b * value_scale * density_scale)

    def to_spec(self):
        return {"kind": self.kind, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Quadratic(RateFunction):
    """rho -> a + b*rho**2."""

    a: float
    b: float
    kind = "quadratic"

    def __post_init__(self):
        _require_positive("a", self.a)
        if self.b < 0:
            raise ParameterError("b must be >= 0 so the rate stays positive")

    def value(self, rho):
        r = _as_rho(rho)
        return _match(rho, self.a + self.b * r * r)

    def derivative(self, rho):
        r = _as_rho(rho)
        return _match(rho, 2.0 * self.b * r)

    def integral(self, rho):
        r = _as_rho(rho)
        return _match(rho, self.a * r + self.b * r ** 3 / 3.0)

    def rescaled(self, value_scale, density_scale):
        return Quadratic(self.a * value_scale, self.b * value_scale * density_scale ** 2)

    def to_spec(self):
        return {"kind": self.kind, "a": self.a, "b": self.b}


def _check_lo_hi(lam_lo, lam_hi):
    _require_positive("lam_lo", lam_lo)
    _require_positive("lam_hi", lam_hi)
    if not lam_lo < lam_hi:
        raise ParameterError(f"need lam_lo < lam_hi, got {lam_lo} >= {lam_hi}")


@dataclass(frozen=True)
class SigmoidExp(RateFunction):
    """Smooth logistic step centred at density 1.

    rho -> lam_lo + (lam_hi - lam_lo) / (1 + exp(-alpha*(rho - 1))).

    Exactly anti-symmetric about 1: value(1+s) + value(1-s) == lam_lo + lam_hi.
    """

    lam_lo: float
    lam_hi: float
    alpha: float
    kind = "sigmoid_exp"

    def __post_init__(self):
        _check_lo_hi(self.lam_lo, self.lam_hi)
        _require_positive("alpha", self.alpha)

    def value(self, rho):
        r = _as_rho(rho)
        s = _sigmoid(self.alpha * (r - 1.0))
        return _match(rho, self.lam_lo + (self.lam_hi - self.lam_lo) * s)

    def derivative(self, rho):
        r = _as_rho(rho)
        s = _sigmoid(self.alpha * (r - 1.0))
        return _match(rho, (self.lam_hi - self.lam_lo) * self.alpha * s * (1.0 - s))

    def integral(self, rho):
        r = _as_rho(rho)
        a = self.alpha
        # antiderivative of the logistic factor is softplus/alpha
        ramp = (_softplus(a * (r - 1.0)) - _softplus(-a)) / a
        return _match(rho, self.lam_lo * r + (self.lam_hi - self.lam_lo) * ramp)

    def rescaled(self, value_scale, density_scale):
        if density_scale != 1.0:
            raise ParameterError(
                "sigmoid_exp is centred at density 1 and cannot absorb a "
                "density rescaling; rescale the densities first"
            )
        return SigmoidExp(self.lam_lo * value_scale, self.lam_hi * value_scale, self.alpha)

    def to_spec(self):
        return {
            "kind": self.kind,
            "lam_lo": self.lam_lo,
            "lam_hi": self.lam_hi,
            "alpha": self.alpha,
        }


@dataclass(frozen=True)
class SigmoidRational(RateFunction):
    """Algebraic sigmoid rising from lam_lo at 0 towards lam_hi.

    rho -> lam_lo + (lam_hi - lam_lo) * alpha*rho**2 / (1 + alpha*rho**2).
    """

    lam_lo: float
    lam_hi: float
    alpha: float
    kind = "sigmoid_rational"

    def __post_init__(self):
        _check_lo_hi(self.lam_lo, self.lam_hi)
        _require_positive("alpha", self.alpha)

    def value(self, rho):
        r = _as_rho(rho)
        q = self.alpha * r * r
        return _match(rho, self.lam_lo + (self.lam_hi - self.lam_lo) * q / (1.0 + q))

    def derivative(self, rho):
        r = _as_rho(rho)
        q = self.alpha * r * r
        return _match(
            rho, (self.lam_hi - self.lam_lo) * 2.0 * self.alpha * r / (1.0 + q) ** 2
        )

    def integral(self, rho):
        r = _as_rho(rho)
        sa = np.sqrt(self.alpha)
        # integral of q/(1+q) is rho - arctan(sqrt(alpha)*rho)/sqrt(alpha)
        return _match(
            rho,
            self.lam_lo * r
            + (self.lam_hi - self.lam_lo) * (r - np.arctan(sa * r) / sa),
        )

    def rescaled(self, value_scale, density_scale):
        return SigmoidRational(
            self.lam_lo * value_scale,
            self.lam_hi * value_scale,
            self.alpha * density_scale ** 2,
        )

    def to_spec(self):
        return {
            "kind": self.kind,
            "lam_lo": self.lam_lo,
            "lam_hi": self.lam_hi,
            "alpha": self.alpha,
        }


@dataclass(frozen=True)
class PiecewiseLinearStep(RateFunction):
    """Step from lam_lo to lam_hi through a linear ramp on [1-eps, 1+eps).

    Constant lam_lo below the ramp, constant lam_hi above it.  The
    derivative at the two kinks follows the right-hand convention: it
    equals the ramp slope at 1-eps and zero at 1+eps.
    """

    lam_lo: float
    lam_hi: float
    eps: float
    kind = "piecewise_linear_step"

    def __post_init__(self):
        _check_lo_hi(self.lam_lo, self.lam_hi)
        if not 0.0 < self.eps < 1.0:
            raise ParameterError(f"eps must lie in (0, 1), got {self.eps}")

    @property
    def slope(self):
        return (self.lam_hi - self.lam_lo) / (2.0 * self.eps)

    def value(self, rho):
        r = _as_rho(rho)
        lo, hi = 1.0 - self.eps, 1.0 + self.eps
        out = np.where(
            r < lo,
            self.lam_lo,
            np.where(r < hi, self.lam_lo + self.slope * (r - lo), self.lam_hi),
        )
        return _match(rho, out)

    def derivative(self, rho):
        r = _as_rho(rho)
        lo, hi = 1.0 - self.eps, 1.0 + self.eps
        out = np.where((r >= lo) & (r < hi), self.slope, 0.0)
        return _match(rho, out)

    def integral(self, rho):
        r = _as_rho(rho)
        lo, hi = 1.0 - self.eps, 1.0 + self.eps
        ramp = np.clip(r - lo, 0.0, 2.0 * self.eps)
        # below the ramp: lam_lo * rho; across it add the quadratic piece;
        # above it continue linearly with slope lam_hi.
        out = (
            self.lam_lo * np.minimum(r, lo)
            + self.lam_lo * ramp
            + 0.5 * self.slope * ramp * ramp
            + self.lam_hi * np.maximum(r - hi, 0.0)
        )
        return _match(rho, out)

    def rescaled(self, value_scale, density_scale):
        if density_scale != 1.0:
            raise ParameterError(
                "piecewise_linear_step is centred at density 1 and cannot "
                "absorb a density rescaling"
            )
        return PiecewiseLinearStep(
            self.lam_lo * value_scale, self.lam_hi * value_scale, self.eps
        )

    def to_spec(self):
        return {
            "kind": self.kind,
            "lam_lo": self.lam_lo,
            "lam_hi": self.lam_hi,
            "eps": self.eps,
        }


@dataclass(frozen=True)
class DoubleSigmoid(RateFunction):
    """Two smooth quadratic-blend steps: lam_lo -> lam_mid -> lam_hi.

    The first step is centred at rho_lo, the second at rho_hi, each blended
    over a half-width delta by matching parabolic arcs, so the function is
    continuously differentiable everywhere.
    """

    lam_lo: float
    lam_mid: float
    lam_hi: float
    rho_lo: float
    rho_hi: float
    delta: float
    kind = "double_sigmoid"

    def __post_init__(self):
        _require_positive("lam_lo", self.lam_lo)
        if not self.lam_lo < self.lam_mid < self.lam_hi:
            raise ParameterError(
                f"need lam_lo < lam_mid < lam_hi, got "
                f"{self.lam_lo}, {self.lam_mid}, {self.lam_hi}"
            )
        if not 0.0 < self.rho_lo < self.rho_hi:
            raise ParameterError(
                f"need 0 < rho_lo < rho_hi, got {self.rho_lo}, {self.rho_hi}"
            )
        limit = min(self.rho_lo, 0.5 * (self.rho_hi - self.rho_lo))
        if not 0.0 < self.delta < limit:
            raise ParameterError(
                f"delta must lie in (0, {limit}) so the two blends stay "
                f"separated and above density 0, got {self.delta}"
            )

    def _pieces(self):
        """Breakpoints t0..t5 and the parabolic curvatures of each step."""
        d = self.delta
        t = (
            self.rho_lo - d,
            self.rho_lo,
            self.rho_lo + d,
            self.rho_hi - d,
            self.rho_hi,
            self.rho_hi + d,
        )
        k1 = (self.lam_mid - self.lam_lo) / (2.0 * d * d)
        k2 = (self.lam_hi - self.lam_mid) / (2.0 * d * d)
        return t, k1, k2

    def value(self, rho):
        r = _as_rho(rho)
        t, k1, k2 = self._pieces()
        lo, mid, hi = self.lam_lo, self.lam_mid, self.lam_hi
        conds = [r < t[0], r < t[1], r < t[2], r < t[3], r < t[4], r < t[5]]
        vals = [
            lo,
            lo + k1 * (r - t[0]) ** 2,
            mid - k1 * (r - t[2]) ** 2,
            mid,
            mid + k2 * (r - t[3]) ** 2,
            hi - k2 * (r - t[5]) ** 2,
        ]
        return _match(rho, np.select(conds, vals, default=hi))

    def derivative(self, rho):
        r = _as_rho(rho)
        t, k1, k2 = self._pieces()
        conds = [r < t[0], r < t[1], r < t[2], r < t[3], r < t[4], r < t[5]]
        vals = [
            0.0,
            2.0 * k1 * (r - t[0]),
            -2.0 * k1 * (r - t[2]),
            0.0,
            2.0 * k2 * (r - t[3]),
            -2.0 * k2 * (r - t[5]),
        ]
        return _match(rho, np.select(conds, vals, default=0.0))

    def integral(self, rho):
        r = _as_rho(rho)
        t, k1, k2 = self._pieces()
        lo, mid, hi = self.lam_lo, self.lam_mid, self.lam_hi

        # cumulative integral up to each breakpoint
        cum = np.empty(6)
        cum[0] = lo * t[0]
        cum[1] = cum[0] + lo * (t[1] - t[0]) + k1 * (t[1] - t[0]) ** 3 / 3.0
        cum[2] = cum[1] + mid * (t[2] - t[1]) - k1 * (
            0.0 - (t[1] - t[2]) ** 3
        ) / 3.0
        cum[3] = cum[2] + mid * (t[3] - t[2])
        cum[4] = cum[3] + mid * (t[4] - t[3]) + k2 * (t[4] - t[3]) ** 3 / 3.0
        cum[5] = cum[4] + hi * (t[5] - t[4]) - k2 * (
            0.0 - (t[4] - t[5]) ** 3
        ) / 3.0

        conds = [r < t[0], r < t[1], r < t[2], r < t[3], r < t[4], r < t[5]]
        vals = [
            lo * r,
            cum[0] + lo * (r - t[0]) + k1 * (r - t[0]) ** 3 / 3.0,
            cum[1]
            + mid * (r - t[1])
            - k1 * ((r - t[2]) ** 3 - (t[1] - t[2]) ** 3) / 3.0,
            cum[2] + mid * (r - t[2]),
            cum[3] + mid * (r - t[3]) + k2 * (r - t[3]) ** 3 / 3.0,
            cum[4]
            + mid * (r - t[4])
            - k2 * ((r - t[5]) ** 3 - (t[4] - t[5]) ** 3) / 3.0,
        ]
        default = cum[5] + hi * (r - t[5])
        return _match(rho, np.select(conds, vals, default=default))

    def rescaled(self, value_scale, density_scale):
        return DoubleSigmoid(
            self.lam_lo * value_scale,
            self.lam_mid * value_scale,
            self.lam_hi * value_scale,
            self.rho_lo / density_scale,
            self.rho_hi / density_scale,
            self.delta / density_scale,
        )

    def to_spec(self):
        return {
            "kind": self.kind,
            "lam_lo": self.lam_lo,
            "lam_mid": self.lam_mid,
            "lam_hi": self.lam_hi,
            "rho_lo": self.rho_lo,
            "rho_hi": self.rho_hi,
            "delta": self.delta,
        }


@dataclass(frozen=True)
class TripleStep(RateFunction):
    """Base level plus three linear-ramp steps.

    Each step i raises the rate by steps[i] through a ramp on
    [centers[i]-eps, centers[i]+eps).  Ramps must not overlap and the first
    must start above density 0.
    """

    base: float
    steps: tuple
    centers: tuple
    eps: float
    kind = "triple_step"

    def __post_init__(self):
        _require_positive("base", self.base)
        _require_positive("eps", self.eps)
        object.__setattr__(self, "steps", tuple(float(s) for s in self.steps))
        object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))
        if len(self.steps) != 3 or len(self.centers) != 3:
            raise ParameterError("need exactly three steps and three centers")
        if any(s < 0 for s in self.steps):
            raise ParameterError("step sizes must be >= 0")
        if sum(self.steps) <= 0:
            raise ParameterError("at least one step must be positive")
        c = self.centers
        if not c[0] < c[1] < c[2]:
            raise ParameterError("centers must be strictly increasing")
        if c[0] - self.eps <= 0:
            raise ParameterError("first ramp must start above density 0")
        for left, right in zip(c[:-1], c[1:]):
            if left + self.eps > right - self.eps:
                raise ParameterError("ramps must not overlap")

    def value(self, rho):
        r = _as_rho(rho)
        out = np.full_like(r, self.base)
        for s, c in zip(self.steps, self.centers):
            out = out + s * np.clip((r - (c - self.eps)) / (2.0 * self.eps), 0.0, 1.0)
        return _match(rho, out)

    def derivative(self, rho):
        r = _as_rho(rho)
        out = np.zeros_like(r)
        for s, c in zip(self.steps, self.centers):
            on_ramp = (r >= c - self.eps) & (r < c + self.eps)
            out = out + np.where(on_ramp, s / (2.0 * self.eps), 0.0)
        return _match(rho, out)

    def integral(self, rho):
        r = _as_rho(rho)
        out = self.base * r
        for s, c in zip(self.steps, self.centers):
            ramp = np.clip(r - (c - self.eps), 0.0, 2.0 * self.eps)
            # quadratic across the ramp, then linear continuation above it
            out = out + s * (
                ramp * ramp / (4.0 * self.eps) + np.maximum(r - (c + self.eps), 0.0)
            )
        return _match(rho, out)

    def rescaled(self, value_scale, density_scale):
        return TripleStep(
            self.base * value_scale,
            tuple(s * value_scale for s in self.steps),
            tuple(c / density_scale for c in self.centers),
            self.eps / density_scale,
        )

    def to_spec(self):
        return {
            "kind": self.kind,
            "base": self.base,
            "steps": list(self.steps),
            "centers": list(self.centers),
            "eps": self.eps,
        }


_KINDS = {
    cls.kind: cls
    for cls in (
        Constant,
        Linear,
        Quadratic,
        SigmoidExp,
        SigmoidRational,
        PiecewiseLinearStep,
        DoubleSigmoid,
        TripleStep,
    )
}


def rate_from_spec(spec):
    """Build a rate function from its JSON dict (inverse of ``to_spec``)."""
    if not isinstance(spec, dict):
        raise ParameterError(f"rate spec must be a dict, got {type(spec).__name__}")
    try:
        kind = spec["kind"]
    except KeyError:
        raise ParameterError("rate spec is missing the 'kind' entry") from None
    try:
        cls = _KINDS[kind]
    except KeyError:
        known = ", ".join(sorted(_KINDS))
        raise ParameterError(f"unknown rate kind {kind!r} (known: {known})") from None

    params = {k: v for k, v in spec.items() if k != "kind"}
    if cls is Constant and "level" in params:
        params["value"] = params.pop("level")
    if cls is Constant:
        params = {"level": params.pop("value")} if "value" in params else params
    if cls is TripleStep:
        for key in ("steps", "centers"):
            if key in params:
                params[key] = tuple(params[key])
    try:
        return cls(**params)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for rate kind {kind!r}: {exc}") from None
