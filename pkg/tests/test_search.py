import math

import pytest
from hypothesis import given, strategies as st

from qfpsim._search import golden_max, grid_golden_max


@given(st.floats(-5, 5), st.floats(0.1, 10))
def test_golden_finds_parabola_peak(x0, curv):
    x, fx = golden_max(lambda x: -curv * (x - x0) ** 2, -6, 6, 1e-9)
    assert x == pytest.approx(x0, abs=1e-7)
    assert fx <= 0


def test_grid_search_escapes_local_maximum():
    f = lambda x: math.cos(3 * x) + 0.3 * math.cos(x)
    x, fx = grid_golden_max(f, 0, 2 * math.pi, 64, 1e-10, periodic=True)
    assert x == pytest.approx(0.0, abs=1e-6) or x == pytest.approx(2 * math.pi, abs=1e-6)
    assert fx == pytest.approx(1.3, abs=1e-12)


def test_grid_search_keeps_exact_boundary_optimum():
    x, fx = grid_golden_max(lambda x: x, 0.0, 4.0, 16, 1e-6)
    assert x == 4.0 and fx == 4.0


@given(st.floats(0.01, 6.2))
def test_periodic_result_wrapped(x0):
    x, _ = grid_golden_max(lambda x: math.cos(x - x0), 0, 2 * math.pi, 36, 1e-10, periodic=True)
    assert 0 <= x < 2 * math.pi
    assert math.cos(x - x0) == pytest.approx(1.0, abs=1e-12)
