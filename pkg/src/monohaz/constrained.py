"""Constrained NPMLE under the pointwise null ``lambda_0(x0) = theta0``.

The diagram is split at the observation interval ``(T_(m), T_(m+1))``
containing x0. Each side is fitted separately and then truncated at
``theta0``; the interval between x0 and the neighbouring observation on the
constrained side carries the value ``theta0`` itself.

Nondecreasing hazard: the left part uses indices 1..m with the exposure of
index m cut at x0, ``(x0 - T_(m)) S_(m+1)``; left slopes are capped above
by theta0, right slopes (indices m+1..n-1) floored at theta0, and theta0
holds on ``[x0, T_(m+1))``.

Nonincreasing hazard: left slopes (indices 1..m) are floored at theta0,
right slopes (indices m+1..n, exposure of m+1 cut to
``(T_(m+1) - x0) S_(m+1)``) capped at theta0, and theta0 holds on
``(T_(m), x0]``.
"""

from dataclasses import dataclass

import numpy as np

from .data import locate_interval
from .errors import ValidationError
from .isotonic import (BlockDecomposition, StepHazard, check_direction,
                       gradient_terms, monotone_slopes, step_hazard)
from .partial_likelihood import risk_set


@dataclass(frozen=True, eq=False)
class ConstrainedFit:
    """Constrained monotone NPMLE at fixed beta.

    ``levels`` has the same indexing as :class:`UnconstrainedFit.levels`.
    ``exposures`` equals the unconstrained exposures except at
    ``special_index`` (m for nondecreasing, m+1 for nonincreasing), where
    only the part of the interval not covered by the theta0 piece counts.
    ``theta_exposure`` is the exposure of that theta0 piece.
    """

    direction: str
    x0: float
    theta0: float
    m: int
    levels: np.ndarray
    exposures: np.ndarray
    theta_exposure: float
    left_slopes: np.ndarray
    right_slopes: np.ndarray
    hazard: StepHazard
    blocks: BlockDecomposition
    beta: np.ndarray

    @property
    def special_index(self):
        return self.m if self.direction == "nondecreasing" else self.m + 1


def split_exposures(sample, beta, x0, direction, m=None):
    """Exposures with the interval around x0 split, plus the theta0 piece."""
    rs = risk_set(sample, beta)
    e = rs.exposures(direction).copy()
    m = locate_interval(sample, x0) if m is None else m
    t = sample.time
    s = rs.suffix[m + 1]
    if direction == "nondecreasing":
        e[m - 1] = (x0 - t[m - 1]) * s
        theta_e = (t[m] - x0) * s
    else:
        e[m] = (t[m] - x0) * s
        theta_e = (x0 - t[m - 1]) * s
    return e, float(theta_e), m


def fit_constrained(sample, beta, x0, theta0, direction):
    check_direction(direction)
    theta0 = float(theta0)
    if not (theta0 > 0 and np.isfinite(theta0)):
        raise ValidationError(f"theta0 must be positive and finite, got {theta0}")
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    x0 = float(x0)
    e, theta_e, m = split_exposures(sample, beta, x0, direction)
    d = sample.status[:e.size].astype(float)

    decreasing = direction == "nonincreasing"
    left = monotone_slopes(d[:m], e[:m], decreasing)
    right = monotone_slopes(d[m:], e[m:], decreasing)
    if decreasing:
        levels = np.concatenate([np.maximum(left, theta0),
                                 np.minimum(right, theta0)])
    else:
        levels = np.concatenate([np.minimum(left, theta0),
                                 np.maximum(right, theta0)])
    hazard = step_hazard(sample, levels, direction, split=(m, x0, theta0))
    return ConstrainedFit(direction, x0, theta0, m, levels, e, theta_e,
                          left, right, hazard,
                          BlockDecomposition.from_levels(levels), beta)


@dataclass(frozen=True)
class KktDiagnostics:
    """Violations of the four condition families of the constrained fit.

    ``left``: partial sums on the constrained side of the left part;
    ``split``: the partial sum that includes the cut index;
    ``right``: partial sums on the right part; ``equality``: the
    complementary-slackness sum ``sum_j g_j (lambda_j - theta0)``.
    Indices in a zero-valued block against the lower bound 0 are left out
    (their multiplier belongs to the bound, not to the ordering).
    """

    left: float
    split: float
    right: float
    equality: float
    scale: float
    tol: float = 1e-8

    @property
    def max_violation(self):
        return max(self.left, self.split, self.right, self.equality)

    @property
    def ok(self):
        return self.max_violation <= self.tol * self.scale


def check_kkt_constrained(sample, beta, fit, theta0=None, tol=1e-8):
    """Optimality conditions of a constrained fit.

    ``theta0`` overrides the value used in the equality condition, which is
    useful for showing the residual responds to a wrong constraint value.
    """
    theta = fit.theta0 if theta0 is None else float(theta0)
    lam = fit.levels
    m = fit.m
    d = sample.status[:lam.size].astype(float)
    g = gradient_terms(d, lam, fit.exposures)
    n_idx = lam.size
    keep = np.ones(n_idx, dtype=bool)

    if fit.direction == "nondecreasing":
        s = 0
        while s < n_idx and lam[s] == 0 and d[s] == 0:
            s += 1
        keep[:s] = False
        pre = np.cumsum(g[s:m]) if s < m else np.empty(0)
        left = max(0.0, -float(pre[:-1].min())) if pre.size > 1 else 0.0
        split = max(0.0, -float(pre[-1])) if pre.size else 0.0
        tail = np.cumsum(g[m:][::-1])[::-1]
        right = max(0.0, float(tail.max())) if tail.size else 0.0
    else:
        end = n_idx
        while end > 0 and lam[end - 1] == 0 and d[end - 1] == 0:
            end -= 1
        keep[end:] = False
        pre = np.cumsum(g[:m])
        left = max(0.0, float(pre.max())) if pre.size else 0.0
        tail = np.cumsum(g[m:end][::-1])[::-1] if end > m else np.empty(0)
        split = max(0.0, -float(tail[0])) if tail.size else 0.0
        right = max(0.0, -float(tail[1:].min())) if tail.size > 1 else 0.0

    eq = float(np.sum(g[keep] * (lam[keep] - theta)))
    return KktDiagnostics(left, split, right, abs(eq),
                          max(1.0, float(d.sum())), tol)
