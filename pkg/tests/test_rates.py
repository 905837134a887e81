"""Rate-function values, derivatives, integrals, and serialisation.

Derivatives are checked against central differences and integrals against
adaptive quadrature for every kind, so the closed forms in the package
never go untested.
"""

import numpy as np
import pytest

from oracles import central_derivative, simpson_adaptive
from ripplewave.errors import DomainError, ParameterError
from ripplewave.rates import (
    Constant,
    DoubleSigmoid,
    Linear,
    PiecewiseLinearStep,
    Quadratic,
    SigmoidExp,
    SigmoidRational,
    TripleStep,
    rate_from_spec,
)

ALL_KINDS = [
    Constant(1.5),
    Linear(0.7, 0.4),
    Quadratic(1.0, 0.3),
    SigmoidExp(2.5, 8.0, 10.0),
    SigmoidRational(0.5, 10.0, 0.125),
    PiecewiseLinearStep(1.0, 2.0, 0.2),
    DoubleSigmoid(2.5, 5.25, 8.0, 0.67, 1.33, 1.0 / 6.0),
    TripleStep(1.0, (0.6, 0.6, 0.6), (0.7, 1.0, 1.3), 0.1),
]

# densities clear of kinks, where the derivative closed forms must match
# a central difference to high order
SMOOTH_POINTS = {
    "constant": [0.3, 1.0, 2.7],
    "linear": [0.3, 1.0, 2.7],
    "quadratic": [0.3, 1.0, 2.7],
    "sigmoid_exp": [0.3, 1.0, 1.7, 2.7],
    "sigmoid_rational": [0.3, 1.0, 1.7, 2.7],
    "piecewise_linear_step": [0.3, 1.0, 1.7, 2.7],
    "double_sigmoid": [0.3, 1.0, 1.45, 2.7],
    "triple_step": [0.3, 1.0, 1.3, 2.7],
}


@pytest.mark.parametrize("rate", ALL_KINDS, ids=lambda r: r.kind)
def test_derivative_matches_central_difference(rate):
    for rho in SMOOTH_POINTS[rate.kind]:
        expected = central_derivative(rate.value, rho, h=1e-5)
        assert rate.derivative(rho) == pytest.approx(expected, abs=1e-7)


@pytest.mark.parametrize("rate", ALL_KINDS, ids=lambda r: r.kind)
def test_integral_matches_quadrature(rate):
    for rho in [0.4, 1.0, 1.9, 3.1]:
        expected = simpson_adaptive(rate.value, 0.0, rho)
        assert rate.integral(rho) == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("rate", ALL_KINDS, ids=lambda r: r.kind)
def test_positive_on_positive_densities(rate):
    rho = np.linspace(1e-9, 6.0, 1201)
    assert np.all(rate.value(rho) > 0.0)


@pytest.mark.parametrize("rate", ALL_KINDS, ids=lambda r: r.kind)
def test_vectorised_value_matches_scalar(rate):
    rho = np.array([0.2, 0.9, 1.4, 3.3])
    vec = rate.value(rho)
    for i, x in enumerate(rho):
        assert vec[i] == pytest.approx(rate.value(float(x)), rel=1e-14)
        assert isinstance(rate.value(float(x)), float)


@pytest.mark.parametrize("rate", ALL_KINDS, ids=lambda r: r.kind)
def test_spec_round_trip(rate):
    clone = rate_from_spec(rate.to_spec())
    rho = np.linspace(0.05, 4.0, 101)
    np.testing.assert_allclose(clone.value(rho), rate.value(rho), rtol=1e-14)


@pytest.mark.parametrize("rate", ALL_KINDS, ids=lambda r: r.kind)
def test_negative_density_rejected(rate):
    with pytest.raises(DomainError):
        rate.value(-0.1)
    with pytest.raises(DomainError):
        rate.value(np.array([0.5, -0.5]))


def test_constant_accepts_value_alias():
    assert rate_from_spec({"kind": "constant", "value": 2.0}).level == 2.0
    assert rate_from_spec({"kind": "constant", "level": 2.0}).level == 2.0


def test_sigmoid_exp_midpoint_and_limits():
    rate = SigmoidExp(2.5, 8.0, 10.0)
    assert rate.value(1.0) == pytest.approx(5.25)
    assert rate.derivative(1.0) == pytest.approx(13.75)
    assert rate.value(0.0) == pytest.approx(2.5, abs=1e-3)
    assert rate.value(4.0) == pytest.approx(8.0, abs=1e-8)


def test_sigmoid_rational_midpoint():
    rate = SigmoidRational(0.5, 10.0, 0.125)
    # q = alpha rho^2 = 0.125 at rho=1: value = 0.5 + 9.5/9
    assert rate.value(1.0) == pytest.approx(0.5 + 9.5 * 0.125 / 1.125)
    assert rate.value(0.0) == pytest.approx(0.5)


def test_ramp_step_geometry():
    rate = PiecewiseLinearStep(1.0, 2.0, 0.2)
    assert rate.value(0.79) == pytest.approx(1.0)
    assert rate.value(1.21) == pytest.approx(2.0)
    assert rate.value(1.0) == pytest.approx(1.5)
    assert rate.slope == pytest.approx(2.5)
    # derivative is the ramp slope inside, zero outside
    assert rate.derivative(1.0) == pytest.approx(2.5)
    assert rate.derivative(0.5) == 0.0
    assert rate.derivative(1.5) == 0.0


def test_double_sigmoid_antisymmetry():
    """The double sigmoid used for pair selection balances about rho=1."""
    rate = DoubleSigmoid(2.5, 5.25, 8.0, 0.67, 1.33, 1.0 / 6.0)
    s = np.linspace(0.0, 0.9, 301)
    total = rate.value(1.0 + s) + rate.value(1.0 - s)
    np.testing.assert_allclose(total, 10.5, rtol=1e-12)


def test_double_sigmoid_plateau_levels():
    rate = DoubleSigmoid(2.5, 5.25, 8.0, 0.67, 1.33, 1.0 / 6.0)
    assert rate.value(0.2) == pytest.approx(2.5)
    assert rate.value(1.0) == pytest.approx(5.25)
    assert rate.value(2.0) == pytest.approx(8.0)


def test_triple_step_levels():
    rate = TripleStep(1.0, (0.6, 0.6, 0.6), (0.7, 1.0, 1.3), 0.1)
    assert rate.value(0.3) == pytest.approx(1.0)
    assert rate.value(0.85) == pytest.approx(1.6)
    assert rate.value(1.15) == pytest.approx(2.2)
    assert rate.value(2.0) == pytest.approx(2.8)


def test_rescaled_rate():
    rate = Quadratic(1.0, 0.3)
    scaled = rate.rescaled(value_scale=2.0, density_scale=0.5)
    # value at the new density argument equals value_scale * old value at
    # density_scale * argument
    for rho in [0.4, 1.0, 2.2]:
        assert scaled.value(rho) == pytest.approx(2.0 * rate.value(0.5 * rho))


@pytest.mark.parametrize(
    "bad",
    [
        lambda: Constant(0.0),
        lambda: Constant(-1.0),
        lambda: Linear(-0.1, 0.2),
        lambda: SigmoidExp(8.0, 2.5, 10.0),
        lambda: SigmoidExp(2.5, 8.0, -1.0),
        lambda: PiecewiseLinearStep(1.0, 2.0, 0.0),
        lambda: PiecewiseLinearStep(1.0, 2.0, 1.5),
        lambda: DoubleSigmoid(2.5, 5.25, 8.0, 0.67, 1.33, 0.5),
        lambda: TripleStep(1.0, (0.6, 0.6), (0.7, 1.0, 1.3), 0.1),
        lambda: TripleStep(1.0, (0.6, 0.6, 0.6), (0.7, 0.75, 1.3), 0.1),
    ],
)
def test_invalid_parameters_rejected(bad):
    with pytest.raises(ParameterError):
        bad()


def test_unknown_kind_rejected():
    with pytest.raises(ParameterError):
        rate_from_spec({"kind": "cubic", "a": 1.0})
