"""A chain of independent multi-state elements pulled by a force.

Each array holds a fraction of the chain's elements; an element of array x
occupies one of a few states, state j having rest energy eps_j and length
y_j.  Under force lam at inverse temperature beta the states are Boltzmann
weighted by e^{-beta (eps - lam y)}.  The mechanical story mirrors the
rate-distortion one exactly: map a coding law to state energies
-ln Q / beta and distortion rows to state lengths, and the force needed to
stretch the chain, the quasistatic work, and the stepwise protocol bounds
all reproduce the information quantities at s = beta * lam.

Units: energies and work are plain numbers with k*T0 = 1/beta; entropy is
reported in units of k (nats).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EnergyInfeasibleError,
    LengthInfeasibleError,
    ScheduleInvalidError,
    ValidationError,
)
from .ratedistortion import RdProblem
from .solvers import adaptive_simpson, invert_monotone
from .tilting import PROB_TOL, VALUE_MERGE_TOL, FiniteDistribution, log_mgf, tilt

__all__ = [
    "ElementArray",
    "ChainSystem",
    "gibbs_free_energy",
    "array_lengths",
    "expected_length",
    "length_variance",
    "equilibrium_force",
    "quasistatic_work",
    "protocol_work",
    "protocol_work_bounds",
    "from_rd_problem",
    "entropy_at_energy",
]


@dataclass(frozen=True, eq=False)
class ElementArray:
    """States of one element type: lengths, rest energies, and the population fraction."""

    state_lengths: np.ndarray
    state_energies: np.ndarray
    fraction: float

    def __post_init__(self):
        y = np.asarray(self.state_lengths, dtype=float).ravel()
        e = np.asarray(self.state_energies, dtype=float).ravel()
        if y.size == 0 or y.size != e.size:
            raise ValidationError("state_lengths and state_energies must be nonempty and equally long")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(e))):
            raise ValidationError("state_lengths and state_energies must be finite")
        if not (math.isfinite(self.fraction) and self.fraction >= 0.0):
            raise ValidationError("fraction must be a nonnegative real")
        y = np.array(y)
        e = np.array(e)
        y.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "state_lengths", y)
        object.__setattr__(self, "state_energies", e)
        object.__setattr__(self, "fraction", float(self.fraction))


@dataclass(frozen=True, eq=False)
class ChainSystem:
    arrays: tuple[ElementArray, ...]
    beta: float = 1.0
    boltzmann_k: float = 1.0

    def __post_init__(self):
        arrays = tuple(self.arrays)
        if not arrays:
            raise ValidationError("a chain needs at least one element array")
        if not (math.isfinite(self.beta) and self.beta > 0.0):
            raise ValidationError("beta must be a positive real")
        if not (math.isfinite(self.boltzmann_k) and self.boltzmann_k > 0.0):
            raise ValidationError("boltzmann_k must be a positive real")
        total = sum(a.fraction for a in arrays)
        if abs(total - 1.0) > PROB_TOL:
            raise ValidationError(f"array fractions must sum to 1 within {PROB_TOL} (got {total!r})")
        object.__setattr__(self, "arrays", arrays)

    @property
    def temperature(self) -> float:
        return 1.0 / (self.boltzmann_k * self.beta)


def _array_moments(arr: ElementArray, beta: float, lam: float):
    """(log partition, mean length, length variance) of one array at force lam."""
    expo = -beta * (arr.state_energies - lam * arr.state_lengths)
    shift = float(expo.max())
    w = np.exp(expo - shift)
    z = float(w.sum())
    p = w / z
    mean = float(np.dot(p, arr.state_lengths))
    centered = arr.state_lengths - mean
    return shift + math.log(z), mean, float(np.dot(p, centered * centered))


def gibbs_free_energy(system: ChainSystem, lam: float) -> float:
    """Per-element Gibbs free energy -(1/beta) sum_x p_x ln Z_x(lam)."""
    total = 0.0
    for arr in system.arrays:
        log_z, _, _ = _array_moments(arr, system.beta, lam)
        total += arr.fraction * log_z
    return -total / system.beta


def array_lengths(system: ChainSystem, lam: float) -> np.ndarray:
    """Boltzmann mean length of each array at force lam."""
    return np.array([_array_moments(a, system.beta, lam)[1] for a in system.arrays])


def expected_length(system: ChainSystem, lam: float) -> float:
    fractions = np.array([a.fraction for a in system.arrays])
    return float(np.dot(fractions, array_lengths(system, lam)))


def length_variance(system: ChainSystem, lam: float) -> float:
    """Population-averaged per-element length variance; beta times this is dY/dlam."""
    total = 0.0
    for arr in system.arrays:
        _, _, var = _array_moments(arr, system.beta, lam)
        total += arr.fraction * var
    return total


def equilibrium_force(system: ChainSystem, target_length: float, tol: float = 1e-10) -> float:
    """Force at which the chain's mean per-element length equals the target."""
    lo = sum(a.fraction * float(a.state_lengths.min()) for a in system.arrays)
    hi = sum(a.fraction * float(a.state_lengths.max()) for a in system.arrays)
    if not lo < target_length < hi:
        raise LengthInfeasibleError(
            f"length {target_length!r} is not strictly inside the achievable range ({lo!r}, {hi!r})"
        )
    return invert_monotone(
        lambda lam: expected_length(system, lam), target_length, f_tol=tol * (hi - lo)
    )


def quasistatic_work(system: ChainSystem, lam_final: float, tol: float = 1e-9) -> float:
    """Reversible work of sweeping the force from 0 to lam_final.

    Integrates lam * dY/dlam with dY/dlam = beta * Var(length); equals
    (1/beta) times the rate function at s = beta * lam_final.
    """
    if lam_final == 0.0:
        return 0.0
    beta = system.beta
    return adaptive_simpson(
        lambda lam: lam * beta * length_variance(system, lam), 0.0, lam_final, tol
    )


def _check_schedule(schedule) -> np.ndarray:
    pts = np.asarray(schedule, dtype=float).ravel()
    if pts.size == 0:
        raise ScheduleInvalidError("schedule must be nonempty")
    if not np.all(np.isfinite(pts)) or pts[0] != 0.0:
        raise ScheduleInvalidError("schedule must be finite and start at force 0")
    steps = np.diff(pts)
    if steps.size and not (np.all(steps >= 0.0) or np.all(steps <= 0.0)):
        raise ScheduleInvalidError("schedule must be monotone")
    return pts


def protocol_work_bounds(system: ChainSystem, schedule) -> tuple[float, float]:
    """(pre-jump, post-jump) work sums of a stepwise force protocol.

    The post-jump sum is the work actually spent jumping the force and
    letting the chain re-equilibrate; the pre-jump sum is its mirror.  The
    quasistatic work lies between them for every monotone schedule.
    """
    pts = _check_schedule(schedule)
    if pts.size == 1:
        return (0.0, 0.0)
    lengths = np.array([expected_length(system, float(l)) for l in pts])
    dy = np.diff(lengths)
    return (float(np.dot(pts[:-1], dy)), float(np.dot(pts[1:], dy)))


def protocol_work(system: ChainSystem, schedule) -> float:
    """Work of the stepwise protocol (post-jump accounting); >= the quasistatic work."""
    return protocol_work_bounds(system, schedule)[1]


def from_rd_problem(problem: RdProblem, beta: float = 1.0) -> ChainSystem:
    """Map a rate-distortion instance onto a chain.

    Source letters become element arrays with fractions P(x), the distortion
    row d(x, .) becomes the state lengths, and the coding law sets the state
    energies -ln Q(xhat) / beta, making the zero-force Boltzmann weights
    reproduce Q exactly.
    """
    if not (math.isfinite(beta) and beta > 0.0):
        raise ValidationError("beta must be a positive real")
    energies = -np.log(problem.coding_probs) / beta
    arrays = tuple(
        ElementArray(
            state_lengths=problem.distortion[i],
            state_energies=energies,
            fraction=float(problem.source_probs[i]),
        )
        for i in range(problem.num_source_letters)
    )
    return ChainSystem(arrays=arrays, beta=beta)


def entropy_at_energy(energy_dist: FiniteDistribution, energy: float, tol: float = 1e-10) -> float:
    """Microcanonical entropy per element at a target mean energy, in units of k.

    The distribution lists the energy levels with weights read as
    multiplicity fractions; the least-weighted level is taken to occur once,
    which sets the absolute state count.  The entropy is the minimum over
    beta >= 0 of beta * E + ln(sum of weighted e^{-beta * eps}); energies at
    the ground level return its log multiplicity (the beta -> infinity
    limit), and energies above the flat-weight mean sit at beta = 0.
    """
    vmin, vmax = energy_dist.min_value, energy_dist.max_value
    span = vmax - vmin
    band = VALUE_MERGE_TOL * max(1.0, span)
    if energy < vmin - band or energy > vmax + band:
        raise EnergyInfeasibleError(
            f"energy {energy!r} outside the spectrum [{vmin!r}, {vmax!r}]"
        )
    log_count = -math.log(float(energy_dist.probs.min()))
    if span == 0.0 or energy <= vmin + band:
        return log_count + math.log(float(energy_dist.probs[0]))
    if energy >= energy_dist.mean:
        return log_count + log_mgf(energy_dist, 0.0)
    s = invert_monotone(
        lambda u: tilt(energy_dist, u).mean,
        energy,
        f_tol=tol * span,
        lo=-1.0,
        hi=0.0,
        hi_limit=0.0,
    )
    beta_star = -s
    return beta_star * energy + log_count + log_mgf(energy_dist, s)
