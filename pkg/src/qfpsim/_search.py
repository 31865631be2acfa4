"""Grid-then-golden-section maximisation on a bounded interval."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

INV_PHI = (math.sqrt(5) - 1) / 2


def golden_max(f: Callable[[float], float], a: float, b: float, tol: float) -> tuple[float, float]:
    """Maximise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    fx = f(x)
    # the interior probes can beat the midpoint on flat tops
    best = max((fx, x), (fc, c), (fd, d))
    return best[1], best[0]


def grid_golden_max(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    points: int,
    tol: float,
    *,
    periodic: bool = False,
) -> tuple[float, float]:
    """Coarse grid scan followed by golden-section refinement around the best node.

    With ``periodic=True`` the interval is treated as a circle (``hi`` excluded)
    and the refinement bracket may straddle ``lo``.
    """
    xs = np.linspace(lo, hi, points, endpoint=not periodic)
    vals = np.array([f(x) for x in xs])
    i = int(np.argmax(vals))
    step = xs[1] - xs[0]
    if periodic:
        a, b = xs[i] - step, xs[i] + step
    else:
        a, b = xs[max(i - 1, 0)], xs[min(i + 1, points - 1)]
    x, fx = golden_max(f, a, b, tol)
    if vals[i] > fx:
        x, fx = xs[i], vals[i]
    if periodic:
        x = lo + (x - lo) % (hi - lo)
    return float(x), float(fx)
