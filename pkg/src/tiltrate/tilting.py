"""Exponential tilting of finite distributions and the scalar rate function.

A tilt parameter s reweights outcome y by e^{s*y}, dragging the mean along
the exponential family; the Legendre rate function prices that displacement
in nats.  The same number is reachable by several routes -- direct Legendre
evaluation, a work integral over the tilted variance, Riemann sums that
sandwich it -- and all of them are exposed so they can cross-check each
other.

Conventions: natural logarithms throughout, so every rate and divergence is
in nats.  All sums of exponentials are max-shifted, so tilts with
|s * y| up to ~700 stay finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    LevelInfeasibleError,
    PartitionInvalidError,
    SupportMismatchError,
    ValidationError,
)
from .solvers import adaptive_simpson, invert_monotone

__all__ = [
    "PROB_TOL",
    "VALUE_MERGE_TOL",
    "FiniteDistribution",
    "TiltReport",
    "RateResult",
    "log_mgf",
    "tilt",
    "rate_at_force",
    "force_at_level",
    "rate_work_integral",
    "mean_via_integral",
    "riemann_sandwich",
    "kl_free_energy_gap",
]

PROB_TOL = 1e-12  # probability vectors must sum to 1 within this
VALUE_MERGE_TOL = 1e-12  # outcome values closer than this are one outcome


@dataclass(frozen=True, eq=False)
class FiniteDistribution:
    """A finite-support distribution over real outcome values.

    Construction sorts the support, drops zero-probability outcomes, merges
    values that coincide within 1e-12, and stores read-only arrays.  The
    probabilities must arrive summing to 1 within 1e-12 and are renormalized
    exactly after cleanup.
    """

    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        probs = np.asarray(self.probs, dtype=float).ravel()
        if values.size == 0 or values.size != probs.size:
            raise ValidationError("values and probs must be nonempty and equally long")
        if not np.all(np.isfinite(values)):
            raise ValidationError("values must all be finite")
        if np.any(probs < 0.0) or not np.all(np.isfinite(probs)):
            raise ValidationError("probs must be finite and nonnegative")
        total = float(probs.sum())
        if abs(total - 1.0) > PROB_TOL:
            raise ValidationError(f"probs must sum to 1 within {PROB_TOL} (got {total!r})")
        keep = probs > 0.0
        if not keep.any():
            raise ValidationError("probs must contain at least one positive entry")
        values, probs = values[keep], probs[keep]
        order = np.argsort(values, kind="stable")
        values, probs = values[order], probs[order]
        merged_v: list[float] = []
        merged_p: list[float] = []
        for v, p in zip(values, probs):
            if merged_v and v - merged_v[-1] <= VALUE_MERGE_TOL:
                merged_p[-1] += p
            else:
                merged_v.append(float(v))
                merged_p.append(float(p))
        values = np.array(merged_v)
        probs = np.array(merged_p)
        probs = probs / probs.sum()
        values.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)

    @property
    def size(self) -> int:
        return int(self.values.size)

    @property
    def min_value(self) -> float:
        return float(self.values[0])

    @property
    def max_value(self) -> float:
        return float(self.values[-1])

    @property
    def mean(self) -> float:
        return float(np.dot(self.probs, self.values))

    @property
    def variance(self) -> float:
        centered = self.values - self.mean
        return float(np.dot(self.probs, centered * centered))


@dataclass(frozen=True, eq=False)
class TiltReport:
    """Snapshot of the exponential family at one tilt value."""

    s: float
    log_mgf: float
    mean: float
    variance: float
    tilted: FiniteDistribution


@dataclass(frozen=True)
class RateResult:
    """A point on the rate curve: achieved level, the force behind it, cost in nats.

    ``force`` is +/-inf when the level sits on an endpoint of the support;
    the rate there is the log cost of the endpoint's own probability.
    """

    level: float
    force: float
    rate: float


def log_mgf(dist: FiniteDistribution, s: float) -> float:
    """ln E[e^{s*y}], max-shifted so large |s| never overflows."""
    expo = s * dist.values
    shift = float(expo.max())
    return shift + math.log(float(np.dot(dist.probs, np.exp(expo - shift))))


def tilt(dist: FiniteDistribution, s: float) -> TiltReport:
    """Reweight the distribution by e^{s*y} and report its exact moments."""
    expo = s * dist.values + np.log(dist.probs)
    shift = float(expo.max())
    w = np.exp(expo - shift)
    z = float(w.sum())
    p = w / z
    mean = float(np.dot(p, dist.values))
    centered = dist.values - mean
    variance = float(np.dot(p, centered * centered))
    return TiltReport(
        s=float(s),
        log_mgf=shift + math.log(z),
        mean=mean,
        variance=variance,
        tilted=FiniteDistribution(dist.values, p),
    )


def rate_at_force(dist: FiniteDistribution, s: float) -> RateResult:
    """Rate function evaluated parametrically at tilt s (Legendre route)."""
    rep = tilt(dist, s)
    rate = s * rep.mean - rep.log_mgf
    return RateResult(level=rep.mean, force=float(s), rate=max(rate, 0.0))


def force_at_level(dist: FiniteDistribution, level: float, tol: float = 1e-10) -> RateResult:
    """Invert the mean map: find the force whose tilted mean hits ``level``.

    Interior levels are solved by bracketed bisection to
    ``|mean - level| <= tol * (max - min)``.  A level on an endpoint of the
    support returns the signed-infinite force sentinel with rate equal to
    -ln(prob of that endpoint); levels outside the support raise.
    """
    vmin, vmax = dist.min_value, dist.max_value
    span = vmax - vmin
    if span == 0.0:
        if abs(level - vmin) <= VALUE_MERGE_TOL * max(1.0, abs(vmin)):
            return RateResult(level=vmin, force=0.0, rate=0.0)
        raise LevelInfeasibleError(
            f"level {level!r} unreachable: distribution is a point mass at {vmin!r}"
        )
    band = VALUE_MERGE_TOL * max(1.0, span)
    if level < vmin - band or level > vmax + band:
        raise LevelInfeasibleError(
            f"level {level!r} outside the achievable range [{vmin!r}, {vmax!r}]"
        )
    if level <= vmin + band:
        return RateResult(level=vmin, force=-math.inf, rate=-math.log(float(dist.probs[0])))
    if level >= vmax - band:
        return RateResult(level=vmax, force=math.inf, rate=-math.log(float(dist.probs[-1])))
    s = invert_monotone(lambda u: tilt(dist, u).mean, level, f_tol=tol * span)
    return RateResult(level=float(level), force=float(s), rate=max(s * level - log_mgf(dist, s), 0.0))


def rate_work_integral(dist: FiniteDistribution, s: float, tol: float = 1e-9) -> float:
    """Work route to the rate: integral of u * Var_u(y) for u from 0 to s."""
    if s == 0.0 or dist.size == 1:
        return 0.0
    return adaptive_simpson(lambda u: u * tilt(dist, u).variance, 0.0, s, tol)


def mean_via_integral(dist: FiniteDistribution, s: float, tol: float = 1e-9) -> float:
    """Tilted mean recovered as mean(0) plus the integrated tilted variance."""
    if s == 0.0 or dist.size == 1:
        return dist.mean
    return dist.mean + adaptive_simpson(lambda u: tilt(dist, u).variance, 0.0, s, tol)


def riemann_sandwich(dist: FiniteDistribution, partition) -> tuple[float, float]:
    """Left- and right-labelled Riemann sums for the work integral.

    ``partition`` is a strictly monotone grid of forces starting at 0; its
    last entry is the endpoint.  The true rate at that endpoint lies between
    the two returned sums, and the gap shrinks linearly under refinement.
    """
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
    means = np.array([tilt(dist, float(s)).mean for s in pts])
    dm = np.diff(means)
    return (float(np.dot(pts[:-1], dm)), float(np.dot(pts[1:], dm)))


def kl_free_energy_gap(q: FiniteDistribution, p: FiniteDistribution) -> float:
    """D(q || p) in nats, matching supports by value within 1e-12.

    This is the free-energy excess of running weights q against the
    equilibrium weights p; it prices q's deviation per sample.
    """
    idx = np.searchsorted(p.values, q.values)
    total = 0.0
    for k, (v, qp) in enumerate(zip(q.values, q.probs)):
        best_j, best_gap = -1, math.inf
        for j in (idx[k] - 1, idx[k]):
            if 0 <= j < p.values.size:
                gap = abs(p.values[j] - v)
                if gap < best_gap:
                    best_j, best_gap = j, gap
        if best_j < 0 or best_gap > VALUE_MERGE_TOL * max(1.0, abs(v)):
            raise SupportMismatchError(f"value {v!r} carried by q has no matching outcome in p")
        total += qp * math.log(qp / float(p.probs[best_j]))
    return total
