"""Scalar search helpers: golden-section minimization and sign bisection."""

from __future__ import annotations

import math
from typing import Callable

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def golden_section_min(
    func: Callable[[float], float], a: float, b: float, tol: float
) -> tuple[float, float]:
    """Minimize a unimodal ``func`` on ``[a, b]``.

    Shrinks the bracket until its width is at most ``tol`` and returns the
    best abscissa seen together with its function value.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, func(x)

    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    fc = func(c)
    fd = func(d)
    for _ in range(n - 1):
        if fc < fd:
            b, d, fd = d, c, fc
            h *= INV_PHI
            c = a + INV_PHI2 * h
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            h *= INV_PHI
            d = a + INV_PHI * h
            fd = func(d)
    if fc < fd:
        return c, fc
    return d, fd


def bisect_sign(
    func: Callable[[float], float], lo: float, hi: float, tol: float
) -> float:
    """Locate the last point where ``func > 0`` between ``lo`` and ``hi``.

    Requires ``func(lo) > 0 >= func(hi)``. Returns the midpoint of the final
    bracket, whose width is at most ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if func(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
