from __future__ import annotations

import math

import numpy as np
import pytest

from rfrac.errors import ParameterError
from rfrac.expr import Expression, parse


def test_arithmetic_and_functions():
    x = np.linspace(-1, 1, 5)
    assert np.allclose(parse("1 + 2*x - x^2")(x), 1 + 2 * x - x**2)
    assert np.allclose(parse("max(0, x) - min(x, 0.5)")(x), np.maximum(0, x) - np.minimum(x, 0.5))
    assert np.allclose(parse("exp(-x**2) * cos(pi*x) + abs(x) + sqrt(2)")(x),
                       np.exp(-x**2) * np.cos(np.pi * x) + np.abs(x) + math.sqrt(2))
    assert parse("-e")(0.3) == pytest.approx(-math.e)
    assert parse("3")(x).shape == x.shape
    assert repr(Expression("x")) == "Expression('x')"


@pytest.mark.parametrize("text", ["__import__('os')", "x.real", "lambda: 1", "y + 1", "max(x)", "exp(x, 2)",
                                  "x if x else 1", "1 +", "True", "[x]", "exp(x=1)"])
def test_rejected_expressions(text):
    with pytest.raises(ParameterError):
        Expression(text)


def test_non_finite_values():
    with pytest.raises(ParameterError):
        parse("1/x")(np.array([0.0, 1.0]))
    with pytest.raises(ParameterError):
        parse("log(x)")(-1.0)
