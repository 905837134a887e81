"""Model parameters and the curves derived from the two rate functions.

The scaled reversal model on the periodic unit interval carries one
left-moving and one right-moving family, each split into a refractory part
(just reversed, cannot reverse again) and a reversible part.  After scaling,
the transport speed is 1 and the total mass is 2, so the only freedom left
is the pair of rate functions:

    turning -- reversal rate of reversible agents, evaluated at the density
               of the opposing family;
    aging   -- rate at which refractory agents become reversible again,
               also evaluated at the opposing family's density.

``DerivedCurves`` bundles the scalar functions of one density that the
analysis modules keep re-using:

    balance(rho)             rho / turning(rho); two densities with equal
                             balance exchange mass at equal rates,
    balance_slope(rho)       its derivative,
    reversible_fraction(rho) aging / (aging + turning), the equilibrium
                             fraction of reversible agents,
    selection_integral(rho)  integral_0^rho turning - turning(rho)*rho/2,
                             the area criterion selecting wave plateaus.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError
from .rates import RateFunction, rate_from_spec

__all__ = ["ModelParams", "DerivedCurves", "nondimensionalize", "load_model"]


@dataclass(frozen=True)
class ModelParams:
    """Rates plus the (fixed) scaled geometry of the model."""

    turning: RateFunction
    aging: RateFunction
    total_mass: float = 2.0
    domain_length: float = 1.0
    speed: float = 1.0

    def __post_init__(self):
        for name in ("turning", "aging"):
            if not isinstance(getattr(self, name), RateFunction):
                raise ParameterError(f"{name} must be a RateFunction")
        for name in ("total_mass", "domain_length", "speed"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ParameterError(f"{name} must be positive, got {val!r}")

    @property
    def curves(self):
        return DerivedCurves(self)

    def to_spec(self):
        return {
            "turning": self.turning.to_spec(),
            "aging": self.aging.to_spec(),
            "total_mass": self.total_mass,
            "domain_length": self.domain_length,
            "speed": self.speed,
        }

    @staticmethod
    def from_spec(spec):
        if not isinstance(spec, dict):
            raise ParameterError("model spec must be a dict")
        names = {}
        for name, aliases in (("turning", ("turning", "lambda", "lam")),
                              ("aging", ("aging", "gamma", "gam"))):
            for alias in aliases:
                if alias in spec:
                    names[name] = rate_from_spec(spec[alias])
                    break
            else:
                raise ParameterError(f"model spec is missing the {name!r} rate")
        extra = {
            key: spec[key]
            for key in ("total_mass", "domain_length", "speed")
            if key in spec
        }
        return ModelParams(names["turning"], names["aging"], **extra)


def load_model(path):
    """Read a ModelParams from a JSON file with 'turning' and 'aging' specs."""
    with open(path) as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"model file {path} is not valid JSON: {exc}") from None
    return ModelParams.from_spec(spec)


class DerivedCurves:
    """Scalar curves derived from one model's rate functions.

    All methods accept scalars or numpy arrays of densities.  ``balance``
    and ``balance_slope`` require strictly positive densities (the ratio
    rho/turning(rho) tends to 0 at 0 but analysis never needs the endpoint).
    """

    def __init__(self, params: ModelParams):
        self.params = params
        self.turning = params.turning
        self.aging = params.aging

    def balance(self, rho):
        arr = np.asarray(rho, dtype=float)
        if np.any(arr <= 0.0):
            raise DomainError("balance requires density > 0")
        return rho / self.turning.value(rho)

    def balance_slope(self, rho):
        arr = np.asarray(rho, dtype=float)
        if np.any(arr <= 0.0):
            raise DomainError("balance_slope requires density > 0")
        lam = self.turning.value(rho)
        dlam = self.turning.derivative(rho)
        return (lam - rho * dlam) / (lam * lam)

    def reversible_fraction(self, rho):
        g = self.aging.value(rho)
        lam = self.turning.value(rho)
        return g / (g + lam)

    def selection_integral(self, rho):
        return self.turning.integral(rho) - 0.5 * self.turning.value(rho) * rho


def nondimensionalize(turning, aging, speed, domain_length, mean_density):
    """Scale dimensional rates to the unit model.

    Starting from agents moving at ``speed`` on a ring of ``domain_length``
    with mean density per family ``mean_density``, the scaled model measures
    space in domains, time in domain crossings, and density in mean
    densities.  Both rates pick up the factor domain_length/speed and read
    their argument in units of mean_density.
    """
    for name, val in (("speed", speed), ("domain_length", domain_length),
                      ("mean_density", mean_density)):
        if not (np.isfinite(val) and val > 0):
            raise ParameterError(f"{name} must be positive, got {val!r}")
    value_scale = domain_length / speed
    return ModelParams(
        turning.rescaled(value_scale, mean_density),
        aging.rescaled(value_scale, mean_density),
    )
