"""Shared scalar numerics: bracketed bisection and adaptive Simpson quadrature.

Both routines are deliberately plain.  Bisection cannot be thrown off by a
vanishing derivative, and the Simpson subdivision order is fixed, so repeated
runs give bit-identical answers.
"""

from __future__ import annotations

import math

__all__ = ["BracketError", "invert_monotone", "adaptive_simpson"]


class BracketError(RuntimeError):
    """Bracket expansion never enclosed the target value."""


def invert_monotone(
    f,
    target: float,
    *,
    f_tol: float,
    lo: float = -1.0,
    hi: float = 1.0,
    lo_limit: float = -math.inf,
    hi_limit: float = math.inf,
    max_expand: int = 60,
    max_bisect: int = 240,
) -> float:
    """Solve f(s) = target for a nondecreasing scalar map f.

    The starting bracket [lo, hi] is grown geometrically (doubling the reach
    on the failing side, clipped to the domain limits) until it encloses the
    target, then bisected.  Iteration stops early once
    ``|f(mid) - target| <= f_tol``; with ``f_tol = 0`` it runs the bracket
    down to machine width, which pins the abscissa itself to ~1e-13 relative.
    """
    lo = max(lo, lo_limit)
    hi = min(hi, hi_limit)
    if not lo < hi:
        mid = min(max(0.0, lo_limit), hi_limit)
        lo = hi = mid
    flo = f(lo)
    fhi = f(hi)

    step = max(hi - lo, 1.0)
    for _ in range(max_expand):
        if flo <= target or lo <= lo_limit:
            break
        step *= 2.0
        lo = max(lo - step, lo_limit)
        flo = f(lo)
    step = max(hi - lo, 1.0)
    for _ in range(max_expand):
        if fhi >= target or hi >= hi_limit:
            break
        step *= 2.0
        hi = min(hi + step, hi_limit)
        fhi = f(hi)
    if flo > target + f_tol or fhi < target - f_tol:
        raise BracketError(
            f"could not bracket target {target!r} within [{lo!r}, {hi!r}]"
        )

    mid = 0.5 * (lo + hi)
    for _ in range(max_bisect):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if f_tol > 0.0 and abs(fm - target) <= f_tol:
            return mid
        if fm < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


def adaptive_simpson(f, a: float, b: float, tol: float, *, max_evals: int = 1_000_000) -> float:
    """Integrate f over [a, b] to the absolute tolerance tol.

    Recursive Simpson with the standard 15x Richardson acceptance test; the
    per-interval tolerance halves on each split.  The evaluation budget only
    guards against runaway subdivision; smooth integrands stay far below it.
    """
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, tol, max_evals=max_evals)
    budget = [max_evals]

    def feval(x: float) -> float:
        budget[0] -= 1
        return f(x)

    fa = feval(a)
    fb = feval(b)
    m, fm, whole = _simpson_slice(feval, a, fa, b, fb)
    return _refine(feval, a, fa, m, fm, b, fb, whole, tol, budget, depth=60)


def _simpson_slice(feval, a, fa, b, fb):
    m = 0.5 * (a + b)
    fm = feval(m)
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _refine(feval, a, fa, m, fm, b, fb, whole, tol, budget, depth):
    lm, flm, left = _simpson_slice(feval, a, fa, m, fm)
    rm, frm, right = _simpson_slice(feval, m, fm, b, fb)
    delta = left + right - whole
    if depth <= 0 or budget[0] <= 0 or abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    half = 0.5 * tol
    return _refine(feval, a, fa, lm, flm, m, fm, left, half, budget, depth - 1) + _refine(
        feval, m, fm, rm, frm, b, fb, right, half, budget, depth - 1
    )
