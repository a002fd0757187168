import math

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdelab.quadrature import adaptive_simpson


@pytest.mark.parametrize("fn, a, b", [
    (math.exp, 0.0, 1.0),
    (math.sin, 0.0, math.pi),
    (lambda s: 1.0 / (1.0 - s) ** 2, -50.0, 0.0),
    (lambda s: math.sqrt(abs(s)), -1.0, 2.0),
])
def test_against_mpmath(fn, a, b):
    exact = float(mpmath.quad(lambda s: fn(float(s)), [a, 0.0, b] if a < 0 < b else [a, b]))
    assert adaptive_simpson(fn, a, b, 1e-12) == pytest.approx(exact, abs=1e-9)


def test_reversed_limits_flip_sign():
    assert adaptive_simpson(math.exp, 1.0, 0.0) == pytest.approx(-(math.e - 1.0), abs=1e-12)
    assert adaptive_simpson(math.exp, 2.0, 2.0) == 0.0


def test_jump_is_resolved_by_depth():
    step = lambda s: 1.0 if s > 0.3 else 0.0  # noqa: E731
    assert adaptive_simpson(step, 0.0, 1.0, 1e-10) == pytest.approx(0.7, abs=1e-9)


@given(st.floats(min_value=-5, max_value=5), st.floats(min_value=-5, max_value=5),
       st.floats(min_value=-3, max_value=3), st.floats(min_value=-3, max_value=3))
def test_exact_on_cubics(a, b, c3, c1):
    f = lambda s: c3 * s**3 + c1 * s + 1.0  # noqa: E731
    F = lambda s: c3 * s**4 / 4 + c1 * s**2 / 2 + s  # noqa: E731
    assert adaptive_simpson(f, a, b) == pytest.approx(F(b) - F(a), abs=1e-9)
