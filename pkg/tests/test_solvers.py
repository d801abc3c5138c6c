"""Unit tests for the bracketed Newton/bisection solver."""

import math

import pytest

from gausdet.errors import InvalidInput
from gausdet.solvers import grow_upper_bracket, solve_bracketed


def test_sqrt_two():
    res = solve_bracketed(lambda x: x * x - 2.0, lambda x: 2.0 * x, 0.0, 2.0)
    assert res.root == pytest.approx(math.sqrt(2.0), abs=1e-11)
    assert abs(res.residual) < 1e-10
    assert res.iterations >= 1


def test_without_derivative_falls_back_to_bisection():
    res = solve_bracketed(lambda x: x * x - 2.0, None, 0.0, 2.0)
    assert res.root == pytest.approx(math.sqrt(2.0), abs=1e-11)


def test_endpoint_roots_exact():
    assert solve_bracketed(lambda x: x, lambda x: 1.0, 0.0, 1.0).root == 0.0
    assert solve_bracketed(lambda x: x - 1.0, None, 0.0, 1.0).root == 1.0


def test_no_sign_change_rejected():
    with pytest.raises(InvalidInput, match="no sign change"):
        solve_bracketed(lambda x: x * x + 1.0, None, 0.0, 1.0)


def test_empty_bracket_rejected():
    with pytest.raises(InvalidInput, match="empty bracket"):
        solve_bracketed(lambda x: x, None, 1.0, 1.0)


def test_steep_function_converges():
    # Newton steps outside the bracket must fall back to bisection.
    f = lambda x: math.tanh(50.0 * (x - 0.7)) + 0.5  # noqa: E731
    res = solve_bracketed(f, lambda x: 50.0 / math.cosh(50.0 * (x - 0.7)) ** 2,
                          0.0, 1.0)
    assert abs(f(res.root)) < 1e-8


def test_grow_upper_bracket():
    hi = grow_upper_bracket(lambda x: 10.0 - x, start=1.0, factor=4.0)
    assert hi >= 10.0
    with pytest.raises(InvalidInput):
        grow_upper_bracket(lambda x: 1.0 + x)
