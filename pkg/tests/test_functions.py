import numpy as np
import pytest

from fracsolve.exceptions import InvalidParams
from fracsolve.functions import (
    Bubble,
    BoundaryPolynomial,
    Constant,
    Power,
    Separable,
    SineMode,
    SineSum,
    Tabulated,
    Zero,
    space_function,
    time_function,
)

X = np.linspace(0, 1, 101)


def test_sine_mode_derivatives():
    f = SineMode(2, 3.0)
    w = 2 * np.pi
    assert np.allclose(f(X), 3 * np.sin(w * X))
    assert np.allclose(f.derivative(X, 1), 3 * w * np.cos(w * X))
    assert np.allclose(f.derivative(X, 2), -3 * w**2 * np.sin(w * X), atol=1e-10)
    assert f.derivative(X, 2)[0] == 0.0 and f.derivative(X, 2)[-1] == 0.0
    with pytest.raises(InvalidParams):
        SineMode(0)


def test_sine_sum_and_bubble():
    s = SineSum([1, 3], [1.0, -0.5])
    assert np.allclose(s(X), np.sin(np.pi * X) - 0.5 * np.sin(3 * np.pi * X))
    with pytest.raises(InvalidParams):
        SineSum([1], [1.0, 2.0])
    b = Bubble(2.0)
    assert np.allclose(b(X), 2 * X * (1 - X))
    assert np.allclose(b.derivative(X, 2), -4.0)
    assert np.allclose(b.derivative(X, 3), 0.0)


def test_boundary_polynomial_vanishes_at_ends():
    p = BoundaryPolynomial((1.0, 2.0, -1.0), 0.5)
    assert p(0.0) == 0.0 and abs(p(1.0)) < 1e-15


def test_tabulated():
    t = Tabulated(X, X**2)
    assert t(0.5) == pytest.approx(0.25, abs=1e-4)
    with pytest.warns(UserWarning):
        d = t.derivative(X, 1)
    assert np.allclose(d[5:-5], 2 * X[5:-5], atol=1e-3)
    with pytest.raises(InvalidParams):
        Tabulated(X[::-1], X)
    with pytest.raises(InvalidParams):
        Tabulated(X[:50], X[:50])
    with pytest.raises(InvalidParams):
        Tabulated([0, 1], [0, 1])


def test_time_functions_and_separable():
    t = np.linspace(0, 1, 5)
    assert np.all(Constant(2.0)(t) == 2.0)
    assert np.allclose(Power(2.0, 3.0)(t), 3 * t**2)
    with pytest.raises(InvalidParams):
        Power(-1)
    g = Separable(Power(1.0), SineMode(1))
    assert g(t, X).shape == (5, 101)
    assert np.allclose(g(t, X), np.outer(t, np.sin(np.pi * X)))
    assert np.allclose(g.dx(t, X, 1), np.outer(t, np.pi * np.cos(np.pi * X)))
    assert np.all(Zero()(X) == 0)


def test_factories():
    assert isinstance(space_function("sin", n=2), SineMode)
    assert isinstance(space_function("bubble"), Bubble)
    assert isinstance(space_function("sine_sum", modes=(1, 2), amplitudes=(1, 1)), SineSum)
    assert isinstance(time_function("power", p=0.5), Power)
    with pytest.raises(InvalidParams):
        space_function("triangle")
    with pytest.raises(InvalidParams):
        time_function("exp")
    assert "SineMode" in repr(SineMode(1))
