"""Channel rates through the distortion formalism.

Take d(x, xhat) = -ln W(x | xhat) as the distortion a codeword xhat pays for
output x, let the source law be the channel's output marginal, and set the
budget to the conditional entropy H(X | Xhat).  The Legendre rate at that
budget is exactly the mutual information, attained at unit force magnitude;
the two routes are independent enough to cross-check each other to machine
accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ChannelDegenerateError, ValidationError
from .solvers import invert_monotone
from .tilting import PROB_TOL, FiniteDistribution, log_mgf, tilt

__all__ = ["Channel", "CapacityPoint", "capacity_point", "mutual_information"]


@dataclass(frozen=True, eq=False)
class Channel:
    """Transition matrix (row = input letter, column = output letter) plus an input law."""

    transition: np.ndarray
    input_probs: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.transition, dtype=float)
        q = np.asarray(self.input_probs, dtype=float).ravel()
        if w.ndim != 2 or w.shape[0] != q.size:
            raise ValidationError(
                f"transition must have one row per input letter (shape {w.shape}, {q.size} inputs)"
            )
        if np.any(w < 0.0) or not np.all(np.isfinite(w)):
            raise ValidationError("transition entries must be finite and nonnegative")
        row_sums = w.sum(axis=1)
        if np.any(np.abs(row_sums - 1.0) > PROB_TOL):
            raise ValidationError("each transition row must sum to 1")
        if np.any(q < 0.0) or not np.all(np.isfinite(q)):
            raise ValidationError("input_probs must be finite and nonnegative")
        if abs(float(q.sum()) - 1.0) > PROB_TOL:
            raise ValidationError("input_probs must sum to 1")
        w = np.array(w)
        q = np.array(q)
        w.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "transition", w)
        object.__setattr__(self, "input_probs", q)


@dataclass(frozen=True)
class CapacityPoint:
    rate: float
    s_star: float
    delta: float


def _output_marginal(channel: Channel) -> np.ndarray:
    return channel.input_probs @ channel.transition


def mutual_information(channel: Channel) -> float:
    """I(Xhat; X) in nats for the given input law, summed over positive entries."""
    w = channel.transition
    q = channel.input_probs
    p_out = _output_marginal(channel)
    mask = (w > 0.0) & (q[:, None] > 0.0)
    ratio = np.ones_like(w)
    np.divide(w, p_out[None, :], out=ratio, where=mask)
    terms = np.zeros_like(w)
    np.log(ratio, out=terms, where=mask)
    return float((q[:, None] * w * terms)[mask].sum())


def capacity_point(channel: Channel, tol: float = 1e-12) -> CapacityPoint:
    """Mutual information recovered as a Legendre rate.

    Builds the rate-distortion instance with source = output marginal,
    coding law = input law, d = -ln W; the distortion budget is
    H(X | Xhat).  Zero transition entries are excluded from each output
    letter's distortion support (an infinite distortion never carries tilted
    mass at negative force) and their missing mass enters the rate exactly
    as a log correction.  The returned force lands at -1 whenever the
    channel is nondegenerate.
    """
    w = channel.transition
    q = channel.input_probs
    p_out = _output_marginal(channel)
    if np.any(p_out <= 0.0):
        dead = int(np.argmin(p_out))
        raise ChannelDegenerateError(
            f"output letter {dead} has zero probability under (input_probs, transition)"
        )

    # conditional entropy H(X | Xhat), with 0 ln 0 = 0
    mask = (w > 0.0) & (q[:, None] > 0.0)
    logs = np.zeros_like(w)
    np.log(w, out=logs, where=mask)
    delta = float(-(q[:, None] * w * logs)[mask].sum())

    dists: list[FiniteDistribution] = []
    log_mass = np.zeros(p_out.size)
    for x in range(p_out.size):
        support = mask[:, x]
        mass = float(q[support].sum())
        dists.append(FiniteDistribution(-logs[support, x], q[support] / mass))
        log_mass[x] = math.log(mass)

    def mean_distortion(s: float) -> float:
        return float(np.dot(p_out, np.array([tilt(d, s).mean for d in dists])))

    d_zero = mean_distortion(0.0)
    span = d_zero - float(np.dot(p_out, np.array([d.min_value for d in dists])))
    if span <= 0.0 or delta >= d_zero - 1e-15 * max(1.0, d_zero):
        # deterministic or budget-saturating channel: rate is the pure mass cost
        rate = float(-np.dot(p_out, log_mass))
        return CapacityPoint(rate=max(rate, 0.0), s_star=0.0, delta=delta)

    # f_tol = 0 runs the bracket to machine width so the force itself is pinned
    s = invert_monotone(mean_distortion, delta, f_tol=0.0, lo=-2.0, hi=0.0, hi_limit=0.0)
    phis = np.array([log_mgf(d, s) for d in dists])
    rate = s * delta - float(np.dot(p_out, phis + log_mass))
    return CapacityPoint(rate=max(rate, 0.0), s_star=float(s), delta=delta)
