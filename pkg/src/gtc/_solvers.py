"""Scalar root finding and 1-d maximization used across modules."""

import math


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def bisect_root(f, a: float, b: float, max_iter: int = 200,
                resid_tol: float = 1e-12, width_tol: float = 1e-15) -> float:
    """Bisection for a sign change of f on [a, b].

    Stops when |f(mid)| <= resid_tol or the bracket width drops below
    width_tol; robust whether or not f is monotone, as long as f(a) and
    f(b) have opposite (or zero) signs.
    """
    fa = f(a)
    fb = f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    mid = 0.5 * (a + b)
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        fm = f(mid)
        if abs(fm) <= resid_tol or (b - a) <= width_tol:
            return mid
        if (fa > 0.0) == (fm > 0.0):
            a, fa = mid, fm
        else:
            b, fb = mid, fm
    return mid


def golden_max(f, a: float, b: float, tol: float = 1e-8) -> tuple[float, float]:
    """Golden-section search for the maximum of a unimodal f on [a, b].

    Returns (x, f(x)) with the bracket narrowed to width <= tol.
    """
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x)
    c = b - _INV_PHI * h
    d = a + _INV_PHI * h
    yc = f(c)
    yd = f(d)
    n = int(math.ceil(math.log(tol / h) / math.log(_INV_PHI)))
    for _ in range(n):
        if yc > yd:
            b, d, yd = d, c, yc
            h = b - a
            c = b - _INV_PHI * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h = b - a
            d = a + _INV_PHI * h
            yd = f(d)
    if yc > yd:
        return c, yc
    return d, yd
