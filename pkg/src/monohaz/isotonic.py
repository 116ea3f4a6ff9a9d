"""Unconstrained NPMLE of a monotone baseline hazard.

For fixed beta the estimator is the vector of left slopes of the greatest
convex minorant (nondecreasing hazard) or least concave majorant
(nonincreasing hazard) of a cumulative sum diagram whose x-increments are
weighted exposures and whose y-increments are event indicators. Slopes are
computed by weighted pool-adjacent-violators; see :mod:`monohaz.kernels`.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSegmentError, NoEventsError, ValidationError
from .kernels import isotonic_blocks
from .partial_likelihood import risk_set

DIRECTIONS = ("nondecreasing", "nonincreasing")


def check_direction(direction):
    if direction not in DIRECTIONS:
        raise ValidationError(
            f"direction must be one of {DIRECTIONS}, got {direction!r}")
    return direction


@dataclass(frozen=True, eq=False)
class CsDiagram:
    """Points ``(x_j, y_j)``, j = 0..k, of a cumulative sum diagram.

    The first point must be the origin and x must be nondecreasing. Diagrams
    built from data also have nondecreasing y; negated diagrams (used for
    concave majorants) do not, so that is not enforced here.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size < 1:
            raise ValidationError("diagram needs matching 1-d x and y")
        if x[0] != 0 or y[0] != 0:
            raise ValidationError("diagram must start at (0, 0)")
        if np.any(np.diff(x) < 0):
            raise ValidationError("diagram x-coordinates must be nondecreasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_increments(cls, dx, dy):
        return cls(np.concatenate([[0.0], np.cumsum(dx)]),
                   np.concatenate([[0.0], np.cumsum(dy)]))

    @property
    def points(self):
        return list(zip(self.x.tolist(), self.y.tolist()))

    def negated(self):
        """The diagram with y-coordinates negated."""
        return CsDiagram(self.x, -self.y)

    def __len__(self):
        return self.x.size


@dataclass(frozen=True, eq=False)
class StepHazard:
    """Piecewise-constant monotone hazard.

    ``values[k]`` is the level between ``breakpoints[k]`` and
    ``breakpoints[k + 1]``. Intervals are closed on the left for a
    nondecreasing hazard (zero before the first breakpoint, unbounded from
    the last one on) and closed on the right for a nonincreasing hazard
    (first breakpoint 0, zero beyond the last one).
    """

    direction: str
    breakpoints: np.ndarray
    values: np.ndarray

    @property
    def tail(self):
        return "unbounded" if self.direction == "nondecreasing" else "zero"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        bp, v = self.breakpoints, self.values
        if self.direction == "nondecreasing":
            k = np.searchsorted(bp, x, side="right") - 1
            padded = np.concatenate([[0.0], v, [np.inf]])
        else:
            k = np.searchsorted(bp, x, side="left") - 1
            k = np.maximum(k, 0)
            padded = np.concatenate([[v[0]], v, [0.0]])
        out = padded[np.clip(k + 1, 0, padded.size - 1)]
        return float(out) if out.ndim == 0 else out

    def to_dict(self):
        """Pieces from 0 on: ``values[k]`` holds from ``breakpoints[k]``."""
        bp, v = self.breakpoints.tolist(), self.values.tolist()
        if self.direction == "nondecreasing":
            bp, v = [0.0] + bp, [0.0] + v
        return {"direction": self.direction, "breakpoints": bp,
                "values": v, "tail": self.tail}

    @classmethod
    def from_dict(cls, d):
        bp = np.asarray(d["breakpoints"], dtype=float)
        v = np.asarray(d["values"], dtype=float)
        if d["direction"] == "nondecreasing":
            bp, v = bp[1:], v[1:]
        return cls(d["direction"], bp, v)


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    """Maximal runs of equal fitted values.

    ``blocks[j]`` is a 1-based inclusive index range ``(first, last)``.
    """

    blocks: tuple
    block_values: np.ndarray

    @classmethod
    def from_levels(cls, levels):
        levels = np.asarray(levels)
        if levels.size == 0:
            return cls((), np.empty(0))
        cut = np.flatnonzero(levels[1:] != levels[:-1]) + 1
        starts = np.concatenate([[0], cut])
        ends = np.concatenate([cut, [levels.size]])
        blocks = tuple((int(s) + 1, int(e)) for s, e in zip(starts, ends))
        return cls(blocks, levels[starts].copy())

    def block_of(self, i):
        for j, (a, b) in enumerate(self.blocks):
            if a <= i <= b:
                return j
        raise IndexError(i)

    def __len__(self):
        return len(self.blocks)


@dataclass(frozen=True, eq=False)
class UnconstrainedFit:
    """Unconstrained monotone NPMLE at fixed beta.

    ``levels[i - 1]`` is the fitted value at ``T_(i)``: indices 1..n-1 for a
    nondecreasing hazard, 1..n for a nonincreasing one. ``exposures`` are the
    matching unnormalized exposure weights.
    """

    direction: str
    levels: np.ndarray
    exposures: np.ndarray
    hazard: StepHazard
    blocks: BlockDecomposition
    beta: np.ndarray

    def __iter__(self):
        yield self.hazard
        yield self.blocks

    def at_index(self, i):
        return float(self.levels[i - 1])


def _increments(sample, beta, direction):
    rs = risk_set(sample, beta)
    e = rs.exposures(direction)
    d = sample.status[:e.size].astype(float)
    return d, e


def build_csd(sample, beta, direction):
    """Cumulative sum diagram, normalized by n, for the given direction."""
    check_direction(direction)
    d, e = _increments(sample, beta, direction)
    n = sample.n
    return CsDiagram.from_increments(e / n, d / n)


def _segments(diagram):
    dx = np.diff(diagram.x)
    if np.any(dx <= 0):
        j = int(np.flatnonzero(dx <= 0)[0]) + 1
        raise DegenerateSegmentError(f"segment {j} has zero x-increment")
    return np.diff(diagram.y), dx


def expand_blocks(starts, values, size):
    lengths = np.diff(np.append(starts, size))
    return np.repeat(values, lengths)


def monotone_slopes(num, den, decreasing=False):
    """Per-segment isotonic (or antitonic) slopes of increments num/den."""
    num = np.asarray(num, dtype=float)
    if num.size == 0:
        return np.empty(0)
    starts, values = isotonic_blocks(num, den, decreasing)
    return expand_blocks(starts, values, num.size)


def gcm_left_slopes(diagram):
    """Left slopes of the greatest convex minorant at points P_1..P_k."""
    dy, dx = _segments(diagram)
    return monotone_slopes(dy, dx)


def lcm_left_slopes(diagram):
    """Left slopes of the least concave majorant at points P_1..P_k."""
    dy, dx = _segments(diagram)
    return monotone_slopes(dy, dx, decreasing=True)


def step_hazard(sample, levels, direction, split=None):
    """StepHazard from per-index levels; ``split=(m, x0, theta0)`` inserts
    the constant piece of a constrained fit."""
    t = sample.time
    levels = np.asarray(levels, dtype=float)
    if direction == "nondecreasing":
        bp, vals = t, levels
        if split is not None:
            m, x0, theta0 = split
            bp = np.concatenate([t[:m], [x0], t[m:]])
            vals = np.concatenate([levels[:m], [theta0], levels[m:]])
    else:
        bp, vals = np.concatenate([[0.0], t]), levels
        if split is not None:
            m, x0, theta0 = split
            bp = np.concatenate([[0.0], t[:m], [x0], t[m:]])
            vals = np.concatenate([levels[:m], [theta0], levels[m:]])
    return StepHazard(direction, bp, vals)


def fit_unconstrained(sample, beta, direction):
    """Monotone NPMLE of the baseline hazard for fixed ``beta``.

    Slopes are taken on the diagram scaled by n (raw event counts over raw
    exposures), so each block value is exactly
    ``sum(Delta) / sum(exposure)`` over its block.
    """
    check_direction(direction)
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    d, e = _increments(sample, beta, direction)
    if direction == "nondecreasing" and not np.any(d == 1):
        raise NoEventsError(
            "nondecreasing fit needs an event among T_(1)..T_(n-1)")
    if np.any(e <= 0):
        i = int(np.flatnonzero(e <= 0)[0]) + 1
        raise DegenerateSegmentError(
            f"zero exposure at index {i} (follow-up time 0?)")
    levels = monotone_slopes(d, e, decreasing=direction == "nonincreasing")
    if np.any(levels[d == 1] <= 0):
        raise AssertionError("event at a zero fitted hazard")
    return UnconstrainedFit(direction, levels, e,
                            step_hazard(sample, levels, direction),
                            BlockDecomposition.from_levels(levels), beta)


@dataclass(frozen=True)
class FenchelDiagnostics:
    inequality_violation: float
    equality_residual: float
    total_gradient: float
    scale: float
    tol: float = 1e-8

    @property
    def ok(self):
        limit = self.tol * self.scale
        return (self.inequality_violation <= limit
                and self.equality_residual <= limit)


def gradient_terms(status, levels, exposures):
    """``Delta_i / lambda_i - exposure_i`` with ``0/0`` read as 0."""
    status = np.asarray(status, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(status > 0, status / levels, 0.0)
    return ratio - exposures


def levels_of(sample, hazard, direction):
    """Per-index levels from a fit, a StepHazard or a raw array."""
    if hasattr(hazard, "levels"):
        return np.asarray(hazard.levels, dtype=float)
    if isinstance(hazard, StepHazard):
        k = sample.n - 1 if direction == "nondecreasing" else sample.n
        return hazard(sample.time[:k])
    return np.asarray(hazard, dtype=float)


def check_fenchel_unconstrained(sample, beta, hazard, direction=None, tol=1e-8):
    """Evaluate the optimality conditions of the unconstrained fit.

    For a nondecreasing hazard: every tail sum of the gradient terms is
    <= 0 and ``sum_j g_j lambda_j = 0``; for a nonincreasing hazard the
    prefix sums take the place of the tail sums. ``total_gradient`` is the
    plain sum of the terms, which vanishes whenever the first fitted level
    (nondecreasing) or the last (nonincreasing) is positive.
    """
    direction = check_direction(direction or hazard.direction)
    levels = levels_of(sample, hazard, direction)
    d, e = _increments(sample, beta, direction)
    g = gradient_terms(d, levels, e)
    if direction == "nondecreasing":
        partial = np.cumsum(g[::-1])[::-1]
    else:
        partial = np.cumsum(g)
    viol = max(0.0, float(np.max(partial)))
    eq = float(np.sum(np.where(levels > 0, g * levels, 0.0)))
    return FenchelDiagnostics(viol, abs(eq), float(np.sum(g)),
                              max(1.0, float(d.sum())), tol)
