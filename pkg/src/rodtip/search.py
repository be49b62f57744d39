"""One-dimensional maximisation helpers used by the peak finders."""
from __future__ import annotations

import math

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def log_scan(f, lo, hi, num=256):
    """Evaluate ``f`` on ``num`` log-spaced points; returns (points, values)."""
    ts = np.geomspace(lo, hi, num)
    return ts, np.array([f(t) for t in ts])


def golden_section_max(f, a, b, rtol=1e-10, max_iter=200):
    """Golden-section search for the maximum of a unimodal ``f`` on [a, b].

    Stops when the bracket width is below ``rtol`` times its midpoint, or
    when the two probes return identical values (the plateau of floating
    point resolution around the maximum). Returns the final bracket.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if h <= rtol * abs(0.5 * (a + b)):
            break
        if fc == fd and h < 1e-6 * abs(0.5 * (a + b)):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + INV_PHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + INV_PHI * h
            fd = f(d)
    return a, b


def parabolic_vertex(x, y, k):
    """Vertex of the parabola through samples k-1, k, k+1 of a uniform-or-not lattice."""
    x0, x1, x2 = x[k - 1], x[k], x[k + 1]
    y0, y1, y2 = y[k - 1], y[k], y[k + 1]
    num = (x1 - x0) ** 2 * (y1 - y2) - (x1 - x2) ** 2 * (y1 - y0)
    den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0)
    if den == 0.0:
        return x1
    return x1 - 0.5 * num / den
