import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ripplewave.model import ModelParams
from ripplewave.rates import (
    Constant,
    PiecewiseLinearStep,
    SigmoidExp,
    SigmoidRational,
)


@pytest.fixture
def trivial_model():
    """Constant unit rates: the fully solvable reference case."""
    return ModelParams(Constant(1.0), Constant(1.0))


@pytest.fixture
def onset_model():
    """Steep sigmoid turning with slow aging; transport-unstable."""
    return ModelParams(SigmoidExp(2.5, 8.0, 10.0), Constant(1.5))


@pytest.fixture
def cycle_model():
    """Same turning rate inside the oscillation window of the aging level."""
    return ModelParams(SigmoidExp(2.5, 8.0, 10.0), Constant(2.5))


@pytest.fixture
def selection_model():
    """Memory-free pattern-selection benchmark (rational sigmoid turning)."""
    return ModelParams(SigmoidRational(0.5, 10.0, 0.125), Constant(1.0))


@pytest.fixture
def ramp_model():
    """Ramp-step turning with unit aging: the closed-form wave case."""
    return ModelParams(PiecewiseLinearStep(1.0, 2.0, 0.2), Constant(1.0))
