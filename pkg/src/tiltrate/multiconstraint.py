"""Joint rate function for two simultaneous distortion ceilings.

The exponent of the event that one random codebook satisfies both budgets is
a two-dimensional Legendre transform: maximize
s1*D1 + s2*D2 - sum_x P(x) ln sum_xhat Q(xhat) e^{s1 d1 + s2 d2}
over nonpositive forces (s1, s2).  The objective is concave with Hessian
minus the source-averaged tilted covariance of (d1, d2), so a damped
projected Newton ascent converges fast; a plain projected gradient step
covers the rank-deficient cases (duplicated or affinely dependent tables).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasiblePairError, NumericalError, ValidationError
from .ratedistortion import _clean_probs

__all__ = ["RdProblem2", "rate_two_distortions"]

_MAX_ITER = 200
_ARMIJO = 1e-4


@dataclass(frozen=True, eq=False)
class RdProblem2:
    """Source law, coding law, and two distortion tables over the same letters."""

    source_probs: np.ndarray
    coding_probs: np.ndarray
    distortion_1: np.ndarray
    distortion_2: np.ndarray

    def __post_init__(self):
        p = _clean_probs(self.source_probs, "source_probs")
        q = _clean_probs(self.coding_probs, "coding_probs")
        mats = []
        for name in ("distortion_1", "distortion_2"):
            d = np.asarray(getattr(self, name), dtype=float)
            if d.ndim != 2 or d.shape != (p.size, q.size):
                raise ValidationError(
                    f"{name} must be a {p.size}x{q.size} matrix (got shape {d.shape})"
                )
            if not np.all(np.isfinite(d)):
                raise ValidationError(f"{name} entries must all be finite")
            mats.append(d)
        rows = p > 0.0
        cols = q > 0.0
        p, q = p[rows], q[cols]
        mats = [np.array(d[np.ix_(rows, cols)]) for d in mats]
        for arr in (p, q, *mats):
            arr.setflags(write=False)
        object.__setattr__(self, "source_probs", p)
        object.__setattr__(self, "coding_probs", q)
        object.__setattr__(self, "distortion_1", mats[0])
        object.__setattr__(self, "distortion_2", mats[1])


def _stats(problem: RdProblem2, s: np.ndarray, delta1: float, delta2: float):
    """Objective value, gradient, and tilted covariance at force pair s."""
    d1, d2 = problem.distortion_1, problem.distortion_2
    p, q = problem.source_probs, problem.coding_probs
    expo = s[0] * d1 + s[1] * d2 + np.log(q)[None, :]
    shift = expo.max(axis=1, keepdims=True)
    w = np.exp(expo - shift)
    z = w.sum(axis=1, keepdims=True)
    cond = w / z
    phi = (shift + np.log(z)).ravel()
    m1 = (cond * d1).sum(axis=1)
    m2 = (cond * d2).sum(axis=1)
    c1 = d1 - m1[:, None]
    c2 = d2 - m2[:, None]
    cov11 = float(np.dot(p, (cond * c1 * c1).sum(axis=1)))
    cov22 = float(np.dot(p, (cond * c2 * c2).sum(axis=1)))
    cov12 = float(np.dot(p, (cond * c1 * c2).sum(axis=1)))
    value = s[0] * delta1 + s[1] * delta2 - float(np.dot(p, phi))
    grad = np.array([delta1 - float(np.dot(p, m1)), delta2 - float(np.dot(p, m2))])
    cov = np.array([[cov11, cov12], [cov12, cov22]])
    return value, grad, cov


def rate_two_distortions(
    problem: RdProblem2, delta1: float, delta2: float, tol: float = 1e-10
) -> tuple[float, float, float]:
    """Rate in nats for the joint budget pair, plus the maximizing forces.

    Returns (rate, s1, s2) with s_i <= 0; a force of exactly 0 means that
    constraint is slack at the optimum.  Pairs below the per-table floors,
    or jointly unsatisfiable ones (detected when the concave objective
    climbs past the log cost any satisfiable event can have), raise
    InfeasiblePairError.
    """
    p, q = problem.source_probs, problem.coding_probs
    for name, d, target in (
        ("delta1", problem.distortion_1, delta1),
        ("delta2", problem.distortion_2, delta2),
    ):
        floor = float(np.dot(p, d.min(axis=1)))
        if not math.isfinite(target) or target <= floor:
            raise InfeasiblePairError(
                f"{name} = {target!r} does not exceed the minimum achievable {floor!r}"
            )

    # Any satisfiable pair has rate at most the cost of forcing the single
    # cheapest reproduction letter everywhere.
    ceiling = -math.log(float(q.min())) + 0.5

    s = np.zeros(2)
    value, grad, cov = _stats(problem, s, delta1, delta2)
    eps = float(np.finfo(float).eps)
    for _ in range(_MAX_ITER):
        pinned = (s >= 0.0) & (grad > 0.0)
        projected_grad = np.where(pinned, 0.0, grad)
        pg_norm = float(np.linalg.norm(projected_grad))
        # Second test: the best improvement any step can still predict,
        # ~|pg|^2 / curvature, has fallen below the resolution of the
        # objective value itself, so the iterate sits on the flat plateau
        # around the maximizer and further ascent is numerically meaningless.
        if pg_norm <= tol or pg_norm * pg_norm <= 8.0 * eps * (1.0 + abs(value)):
            return max(value, 0.0), float(s[0]), float(s[1])
        if value > ceiling:
            raise InfeasiblePairError(
                f"budget pair ({delta1!r}, {delta2!r}) is jointly unsatisfiable"
            )
        free = ~pinned
        sub = cov[np.ix_(free, free)]
        g_free = grad[free]
        # A Newton or pseudoinverse step must climb at a rate commensurate
        # with the gradient itself; a singular covariance (affinely dependent
        # tables) otherwise yields a vanishing step along the null ray that
        # passes a bare positivity test while the gradient still points off
        # the ray.  Plain ascent always stays on the menu as the backstop.
        ascent_floor = 1e-12 * float(np.dot(g_free, g_free))
        directions = []
        try:
            cand = np.linalg.solve(sub, g_free)
            if np.all(np.isfinite(cand)) and float(np.dot(cand, g_free)) > ascent_floor:
                directions.append(cand)
        except np.linalg.LinAlgError:
            pass
        if not directions:
            cand = np.linalg.pinv(sub) @ g_free
            if np.all(np.isfinite(cand)) and float(np.dot(cand, g_free)) > ascent_floor:
                directions.append(cand)
        directions.append(g_free)

        accepted = False
        for index, direction in enumerate(directions):
            step = np.zeros(2)
            step[free] = direction
            alpha = 1.0
            if index == len(directions) - 1:
                # Plain-ascent backstop: open the line search wide enough to
                # reach the nearest upper bound, so a coordinate headed for
                # zero force pins there in one step instead of crawling (on a
                # degenerate table the gradient is constant along its own
                # direction, so fixed unit steps crawl).  Newton steps keep
                # their natural unit scale.
                rising = (step > 0.0) & (s < 0.0)
                if np.any(rising):
                    crossing = float(np.min(-s[rising] / step[rising]))
                    alpha = max(1.0, min(crossing, 1e8))
            for _ in range(60):
                trial = np.minimum(s + alpha * step, 0.0)
                if np.array_equal(trial, s):
                    break
                t_value, t_grad, t_cov = _stats(problem, trial, delta1, delta2)
                if t_value >= value + _ARMIJO * float(np.dot(grad, trial - s)):
                    s, value, grad, cov = trial, t_value, t_grad, t_cov
                    accepted = True
                    break
                alpha *= 0.5
            if accepted:
                break
        if not accepted:
            # No direction produced a representable gain, so the line search
            # has proven the plateau directly; accept if the optimality
            # residual is small on the value's own scale.
            if pg_norm <= max(tol, 1e-9) or pg_norm * pg_norm <= 64.0 * eps * (1.0 + abs(value)):
                return max(value, 0.0), float(s[0]), float(s[1])
            raise NumericalError("two-force ascent stalled before reaching tolerance")
    raise NumericalError(f"two-force ascent did not converge in {_MAX_ITER} iterations")
