"""Dense-grid extrema of smooth scalar functions with golden-section polishing."""
from __future__ import annotations

import math

import numpy as np

GRID_POINTS = 2001
GOLDEN_TOL = 1e-10
N_REFINE = 3
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(fun, lo: float, hi: float, tol: float):
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = fun(d)
    x = 0.5 * (a + b)
    return x, fun(x)


def grid_max(vec_fun, lo: float, hi: float, points: int = GRID_POINTS, extra=None, tol: float = GOLDEN_TOL):
    """(argmax, max) of vec_fun on [lo, hi].

    vec_fun maps an array to an array.  `extra` is an optional list of
    (x, value) samples (e.g. exact limits at a removable singularity) that
    take part in the comparison but are not refined.
    """
    xs = np.linspace(lo, hi, points)
    ys = np.asarray(vec_fun(xs), dtype=float)
    best_x, best_y = float(xs[np.argmax(ys)]), float(np.max(ys))

    def scalar(x):
        return float(np.asarray(vec_fun(np.array([x])), dtype=float)[0])

    for idx in np.argsort(ys)[::-1][:N_REFINE]:
        left = xs[max(idx - 1, 0)]
        right = xs[min(idx + 1, points - 1)]
        x, y = _golden_max(scalar, float(left), float(right), tol)
        if y > best_y:
            best_x, best_y = x, y
    for x, y in extra or ():
        if y > best_y:
            best_x, best_y = float(x), float(y)
    return best_x, best_y


def grid_min(vec_fun, lo: float, hi: float, points: int = GRID_POINTS, extra=None, tol: float = GOLDEN_TOL):
    """(argmin, min) of vec_fun on [lo, hi]; see grid_max."""
    neg_extra = [(x, -y) for x, y in extra or ()]
    x, y = grid_max(lambda v: -np.asarray(vec_fun(v), dtype=float), lo, hi, points, neg_extra, tol)
    return x, -y
