"""Fixed-coding-law rate-distortion: every route to the constrained curve.

An instance fixes a source law P over letters x, a coding law Q over
reproduction letters, and a distortion table d(x, xhat).  For a nonpositive
force s the per-letter distortion distributions are tilted jointly, and the
curve (distortion(s), rate(s)) traces the exponent of the event that a
random codeword lands within a distortion budget.  The force solved for a
target distortion also yields the per-letter budget split that equalizes
forces across source letters, which is what makes the constrained exponent
tight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .errors import DistortionTooLowError, ValidationError
from .solvers import adaptive_simpson, invert_monotone
from .tilting import PROB_TOL, FiniteDistribution, log_mgf, tilt
from .tilting import VALUE_MERGE_TOL  # noqa: F401  (re-exported scale shared by callers)

__all__ = [
    "RdProblem",
    "RdPoint",
    "Allocation",
    "build_delta_dists",
    "distortion_at_force",
    "force_at_distortion",
    "rate_legendre",
    "equal_force_allocation",
    "mmse",
    "rate_mmse_integral",
    "distortion_mmse_integral",
    "sandwich_bounds",
    "tilted_conditional",
    "observable_expectation",
    "observable_sweep",
    "rd_curve",
]


def _clean_probs(vec, name: str) -> np.ndarray:
    v = np.asarray(vec, dtype=float).ravel()
    if v.size == 0:
        raise ValidationError(f"{name} must be nonempty")
    if np.any(v < 0.0) or not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} must be finite and nonnegative")
    total = float(v.sum())
    if abs(total - 1.0) > PROB_TOL:
        raise ValidationError(f"{name} must sum to 1 within {PROB_TOL} (got {total!r})")
    return v


@dataclass(frozen=True, eq=False)
class RdProblem:
    """Source law, coding law, and a finite distortion table.

    Zero-probability source letters (rows) and reproduction letters
    (columns) are dropped at construction; the stored arrays are read-only.
    """

    source_probs: np.ndarray
    coding_probs: np.ndarray
    distortion: np.ndarray

    def __post_init__(self):
        p = _clean_probs(self.source_probs, "source_probs")
        q = _clean_probs(self.coding_probs, "coding_probs")
        d = np.asarray(self.distortion, dtype=float)
        if d.ndim != 2 or d.shape != (p.size, q.size):
            raise ValidationError(
                f"distortion must be a {p.size}x{q.size} matrix (got shape {d.shape})"
            )
        if not np.all(np.isfinite(d)):
            raise ValidationError("distortion entries must all be finite")
        rows = p > 0.0
        cols = q > 0.0
        p, q, d = p[rows], q[cols], d[np.ix_(rows, cols)]
        d = np.array(d)
        for arr in (p, q, d):
            arr.setflags(write=False)
        object.__setattr__(self, "source_probs", p)
        object.__setattr__(self, "coding_probs", q)
        object.__setattr__(self, "distortion", d)

    @cached_property
    def delta_dists(self) -> tuple[FiniteDistribution, ...]:
        return tuple(
            FiniteDistribution(self.distortion[i], self.coding_probs)
            for i in range(self.source_probs.size)
        )

    @property
    def num_source_letters(self) -> int:
        return int(self.source_probs.size)


@dataclass(frozen=True, eq=False)
class RdPoint:
    """One point of the curve, carried with its per-letter moments.

    ``boundary`` is None for interior points, "min_distortion" when the
    request was pinned at the smallest achievable distortion (force -inf),
    and "above_zero_force" when the request exceeded the zero-force
    distortion and was answered with the zero-rate point.
    """

    s: float
    distortion: float
    rate: float
    per_symbol_mean: np.ndarray
    per_symbol_var: np.ndarray
    mmse: float
    boundary: str | None = None


@dataclass(frozen=True, eq=False)
class Allocation:
    """Per-source-letter distortion budgets."""

    per_symbol_distortion: np.ndarray

    def total(self, problem: RdProblem) -> float:
        return float(np.dot(problem.source_probs, self.per_symbol_distortion))


def build_delta_dists(problem: RdProblem) -> tuple[FiniteDistribution, ...]:
    """Distribution of the distortion value seen by each source letter.

    Reproduction letters that land on the same distortion (within 1e-12) are
    merged into one outcome with their coding probabilities summed.
    """
    return problem.delta_dists


def distortion_at_force(problem: RdProblem, s: float) -> RdPoint:
    """Evaluate the curve parametrically at force s (s <= 0 on the useful branch)."""
    reports = [tilt(d, s) for d in problem.delta_dists]
    means = np.array([r.mean for r in reports])
    variances = np.array([r.variance for r in reports])
    p = problem.source_probs
    delta = float(np.dot(p, means))
    phi = float(np.dot(p, np.array([r.log_mgf for r in reports])))
    return RdPoint(
        s=float(s),
        distortion=delta,
        rate=max(s * delta - phi, 0.0),
        per_symbol_mean=means,
        per_symbol_var=variances,
        mmse=float(np.dot(p, variances)),
    )


def _minimum_distortion(problem: RdProblem) -> float:
    return float(
        np.dot(problem.source_probs, np.array([d.min_value for d in problem.delta_dists]))
    )


def force_at_distortion(problem: RdProblem, delta: float, tol: float = 1e-10) -> RdPoint:
    """Solve for the nonpositive force whose mean distortion hits ``delta``.

    Bisection guarantees |distortion(s) - delta| <= tol * (D0 - Dmin) for
    interior targets.  delta == D0 returns the zero-force point exactly;
    delta > D0 returns it flagged "above_zero_force" (the event is typical,
    rate 0).  delta at the minimum achievable distortion returns the
    infinite-force endpoint whose rate is the log cost of every source
    letter drawing its cheapest reproduction; below that it raises.
    """
    zero_point = distortion_at_force(problem, 0.0)
    if delta >= zero_point.distortion:
        if delta > zero_point.distortion:
            return replace(zero_point, boundary="above_zero_force")
        return zero_point
    dmin = _minimum_distortion(problem)
    span = zero_point.distortion - dmin
    band = VALUE_MERGE_TOL * max(1.0, span)
    if delta < dmin - band:
        raise DistortionTooLowError(
            f"distortion {delta!r} is below the minimum achievable {dmin!r}"
        )
    if delta <= dmin + band:
        dists = problem.delta_dists
        means = np.array([d.min_value for d in dists])
        mass = np.array([float(d.probs[0]) for d in dists])
        rate = float(-np.dot(problem.source_probs, np.log(mass)))
        return RdPoint(
            s=-math.inf,
            distortion=dmin,
            rate=rate,
            per_symbol_mean=means,
            per_symbol_var=np.zeros_like(means),
            mmse=0.0,
            boundary="min_distortion",
        )

    dists = problem.delta_dists
    p = problem.source_probs

    def mean_distortion(u: float) -> float:
        return float(np.dot(p, np.array([tilt(d, u).mean for d in dists])))

    s = invert_monotone(
        mean_distortion, delta, f_tol=tol * span, lo=-1.0, hi=0.0, hi_limit=0.0
    )
    return distortion_at_force(problem, s)


def rate_legendre(problem: RdProblem, delta: float, tol: float = 1e-10) -> float:
    """Rate in nats at distortion ``delta`` (Legendre route)."""
    return force_at_distortion(problem, delta, tol).rate


def equal_force_allocation(problem: RdProblem, delta: float, tol: float = 1e-10) -> tuple[Allocation, float]:
    """Split the distortion budget so every source letter works at one force.

    Returns the per-letter budgets (the tilted means at the common force)
    and the rate they cost, which matches the joint Legendre rate: the
    equal-force split is exactly the one no other split can beat.
    """
    point = force_at_distortion(problem, delta, tol)
    allocation = Allocation(per_symbol_distortion=point.per_symbol_mean)
    if point.boundary == "min_distortion":
        return allocation, point.rate
    p = problem.source_probs
    phis = np.array([log_mgf(d, point.s) for d in problem.delta_dists])
    rate = float(np.dot(p, point.s * point.per_symbol_mean - phis))
    return allocation, max(rate, 0.0)


def mmse(problem: RdProblem, s: float) -> float:
    """Source-averaged tilted variance of the distortion at force s."""
    return float(
        np.dot(
            problem.source_probs,
            np.array([tilt(d, s).variance for d in problem.delta_dists]),
        )
    )


def rate_mmse_integral(problem: RdProblem, s: float, tol: float = 1e-9) -> float:
    """Rate recovered as the work integral of u * mmse(u) from 0 to s."""
    if s == 0.0:
        return 0.0
    return adaptive_simpson(lambda u: u * mmse(problem, u), 0.0, s, tol)


def distortion_mmse_integral(problem: RdProblem, s: float, tol: float = 1e-9) -> float:
    """Distortion recovered as D0 plus the integrated mmse from 0 to s."""
    d0 = distortion_at_force(problem, 0.0).distortion
    if s == 0.0:
        return d0
    return d0 + adaptive_simpson(lambda u: mmse(problem, u), 0.0, s, tol)


def sandwich_bounds(problem: RdProblem, partition) -> tuple[float, float]:
    """Riemann sums over a force grid that bracket the rate at its endpoint."""
    from .errors import PartitionInvalidError

    pts = np.asarray(partition, dtype=float).ravel()
    if pts.size == 0:
        raise PartitionInvalidError("partition must be nonempty")
    if not np.all(np.isfinite(pts)) or pts[0] != 0.0:
        raise PartitionInvalidError("partition must be finite and start at 0")
    if pts.size == 1:
        return (0.0, 0.0)
    steps = np.diff(pts)
    if not (np.all(steps > 0.0) or np.all(steps < 0.0)):
        raise PartitionInvalidError("partition must be strictly monotone")
    deltas = np.array([distortion_at_force(problem, float(s)).distortion for s in pts])
    dd = np.diff(deltas)
    return (float(np.dot(pts[:-1], dd)), float(np.dot(pts[1:], dd)))


def tilted_conditional(problem: RdProblem, s: float) -> np.ndarray:
    """Matrix of tilted reproduction laws Q_s(xhat | x) proportional to Q(xhat) e^{s d}."""
    expo = s * problem.distortion + np.log(problem.coding_probs)[None, :]
    expo = expo - expo.max(axis=1, keepdims=True)
    w = np.exp(expo)
    return w / w.sum(axis=1, keepdims=True)


def _check_observable(problem: RdProblem, observable) -> np.ndarray:
    t = np.asarray(observable, dtype=float)
    if t.shape != problem.distortion.shape:
        raise ValidationError(
            f"observable must match the distortion table shape {problem.distortion.shape}"
        )
    if not np.all(np.isfinite(t)):
        raise ValidationError("observable entries must all be finite")
    return t


def observable_expectation(problem: RdProblem, observable, s: float) -> float:
    """Direct expectation of a letter-pair observable under the tilted law."""
    t = _check_observable(problem, observable)
    cond = tilted_conditional(problem, s)
    return float(np.dot(problem.source_probs, (cond * t).sum(axis=1)))


def observable_sweep(problem: RdProblem, observable, s: float, tol: float = 1e-9) -> float:
    """Tilted expectation of an observable, built by integrating its covariance
    with the distortion along the force sweep from 0 to s.

    Agrees with :func:`observable_expectation` at the endpoint to within the
    quadrature tolerance; the integral form shows how the force drags any
    observable, not just the distortion itself.
    """
    t = _check_observable(problem, observable)
    d = problem.distortion
    p = problem.source_probs

    def covariance(u: float) -> float:
        cond = tilted_conditional(problem, u)
        et = (cond * t).sum(axis=1)
        ed = (cond * d).sum(axis=1)
        etd = (cond * t * d).sum(axis=1)
        return float(np.dot(p, etd - et * ed))

    base = observable_expectation(problem, t, 0.0)
    if s == 0.0:
        return base
    return base + adaptive_simpson(covariance, 0.0, s, tol)


def rd_curve(problem: RdProblem, force_grid) -> list[RdPoint]:
    """Evaluate the curve on a grid of nonpositive forces, ordered s descending."""
    grid = np.asarray(force_grid, dtype=float).ravel()
    if grid.size == 0:
        raise ValidationError("force_grid must be nonempty")
    if not np.all(np.isfinite(grid)) or np.any(grid > 0.0):
        raise ValidationError("force_grid values must be finite and <= 0")
    order = np.argsort(-grid, kind="stable")
    return [distortion_at_force(problem, float(s)) for s in grid[order]]
