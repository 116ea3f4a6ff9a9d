"""Likelihood ratio test for ``lambda_0(x0) = theta0`` and pointwise
confidence intervals.

Loglikelihoods are the reduced pseudo-loglikelihoods of the step-function
maximizers: ``sum_i [Delta_i log lambda_i - lambda_i * exposure_i]`` over
the fitted indices, plus ``-theta0 * theta_exposure`` for a constrained fit.
The ``Delta' beta' Z`` terms are common to both fits and omitted.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .constrained import ConstrainedFit, fit_constrained
from .data import locate_interval
from .errors import (DerivativeUnavailableError, InternalConsistencyError,
                     MinusInfinityError, ValidationError)
from .isotonic import (UnconstrainedFit, check_direction, fit_unconstrained,
                       levels_of)
from .partial_likelihood import PhiEvaluator, risk_set

SCHEMA = "monohaz/1"
CLAMP_TOL = 1e-10


class QuantileTable:
    """Quantiles of the limit distributions used for interval construction.

    Defaults are the published values ``q(Z, 0.975) = 0.998181`` and
    ``q(D, 0.95) = 2.286922``. Other probabilities can be supplied, e.g.
    from :func:`monohaz.limit_process.estimate_quantiles`.
    """

    Q_Z_0975 = 0.998181
    Q_D_095 = 2.286922

    def __init__(self, d_quantiles=None, z_quantiles=None):
        self._d = {0.95: self.Q_D_095}
        self._z = {0.975: self.Q_Z_0975}
        self._d.update({round(float(k), 12): float(v)
                        for k, v in (d_quantiles or {}).items()})
        self._z.update({round(float(k), 12): float(v)
                        for k, v in (z_quantiles or {}).items()})

    def d(self, prob):
        return self._lookup(self._d, prob, "D")

    def z(self, prob):
        return self._lookup(self._z, prob, "Z")

    @staticmethod
    def _lookup(table, prob, name):
        key = round(float(prob), 12)
        if key not in table:
            raise ValidationError(
                f"no tabulated quantile q({name}, {prob}); pass quantile= "
                "explicitly or estimate one with `monohaz quantiles`")
        return table[key]


DEFAULT_QUANTILES = QuantileTable()


def loglik(sample, beta, hazard, direction=None, strict=False):
    """Reduced pseudo-loglikelihood of a fitted or user-supplied hazard.

    ``hazard`` may be an :class:`UnconstrainedFit`, a :class:`ConstrainedFit`
    (whose theta0 piece contributes ``-theta0 * theta_exposure``), a
    :class:`StepHazard` on the sample's time grid or a vector of per-index
    levels. An event at a zero hazard gives ``-inf`` (or raises
    :class:`MinusInfinityError` when ``strict``).
    """
    if direction is None:
        direction = getattr(hazard, "direction", None)
    check_direction(direction)
    if isinstance(hazard, ConstrainedFit):
        lam, e = hazard.levels, hazard.exposures
        const = -hazard.theta0 * hazard.theta_exposure
    else:
        lam = levels_of(sample, hazard, direction)
        e = risk_set(sample, beta).exposures(direction)
        const = 0.0
        if lam.shape != e.shape:
            raise ValidationError(
                f"expected {e.size} hazard levels, got {lam.size}")
    d = sample.status[:lam.size]
    ev = d == 1
    if np.any(lam[ev] <= 0):
        if strict:
            raise MinusInfinityError("event at a zero hazard value")
        return -math.inf
    return float(np.sum(np.log(lam[ev])) - np.dot(lam, e) + const)


@dataclass(frozen=True)
class LrtResult:
    theta0: float
    x0: float
    direction: str
    m: int
    loglik_unconstrained: float
    loglik_constrained: float
    statistic: float
    beta_used: tuple
    point_estimate: float

    def to_dict(self):
        d = asdict(self)
        d["beta_used"] = list(self.beta_used)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["beta_used"] = tuple(d["beta_used"])
        return cls(**{k: d[k] for k in cls.__dataclass_fields__})

    def reject(self, quantile=QuantileTable.Q_D_095):
        return self.statistic > quantile


def point_estimate(fit, m):
    """Unconstrained fitted value on the observation interval containing x0."""
    return fit.at_index(m if fit.direction == "nondecreasing" else m + 1)


def likelihood_ratio(unconstrained, constrained, sample):
    """``2 (L_unconstrained - L_constrained)`` summed index by index.

    Indices where the two fits agree contribute exactly zero, which keeps
    the statistic free of cancellation error near the null value.
    """
    lu, lc = unconstrained.levels, constrained.levels
    ec = constrained.exposures
    d = sample.status[:lu.size]
    ev = d == 1
    with np.errstate(divide="ignore"):
        logs = np.where(ev, np.log(np.where(ev, lu, 1.0))
                        - np.log(np.where(ev, lc, 1.0)), 0.0)
    terms = logs - (lu - lc) * ec
    s = constrained.special_index - 1
    terms[s] += (constrained.theta0 - lu[s]) * constrained.theta_exposure
    stat = 2.0 * float(np.sum(terms))
    if math.isnan(stat):
        stat = math.inf
    return stat


def lrt(sample, beta, x0, theta0, direction, unconstrained=None):
    """Likelihood ratio statistic ``2 log xi_n(theta0)`` at ``x0``."""
    check_direction(direction)
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    m = locate_interval(sample, x0)
    fu = unconstrained or fit_unconstrained(sample, beta, direction)
    fc = fit_constrained(sample, beta, x0, theta0, direction)
    lu = loglik(sample, beta, fu)
    lc = loglik(sample, beta, fc)
    stat = likelihood_ratio(fu, fc, sample)
    if stat < 0:
        if stat < -CLAMP_TOL * max(1.0, abs(lu)):
            raise InternalConsistencyError(
                f"negative likelihood ratio {stat} at theta0={theta0}")
        stat = 0.0
    return LrtResult(float(theta0), float(x0), direction, m, lu, lc, stat,
                     tuple(beta.tolist()), point_estimate(fu, m))


@dataclass
class IntervalReport:
    method: str
    level: float
    lower: float
    upper: float
    point_estimate: float
    quantile_used: float
    statistic_at_bounds: tuple = (None, None)
    diagnostics: dict = field(default_factory=dict)

    @property
    def length(self):
        return self.upper - self.lower

    def contains(self, value):
        return self.lower <= value <= self.upper

    def to_dict(self):
        d = asdict(self)
        d["statistic_at_bounds"] = list(self.statistic_at_bounds)
        for key in ("lower", "upper"):
            if math.isinf(d[key]):
                d[key] = "inf" if d[key] > 0 else "-inf"
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for key in ("lower", "upper"):
            d[key] = float(d[key])
        d["statistic_at_bounds"] = tuple(d["statistic_at_bounds"])
        return cls(**{k: d[k] for k in cls.__dataclass_fields__})


def _check_level(level):
    level = float(level)
    if not 0 < level < 1:
        raise ValidationError(f"level must lie in (0, 1), got {level}")
    return level


class _Profile:
    """Memoized ``theta -> 2 log xi_n(theta)`` at a fixed x0."""

    def __init__(self, sample, beta, x0, direction, fit):
        self.args = (sample, beta, x0, direction)
        self.fit = fit
        self.calls = {}

    def __call__(self, theta):
        if theta not in self.calls:
            sample, beta, x0, direction = self.args
            self.calls[theta] = lrt(sample, beta, x0, theta, direction,
                                    unconstrained=self.fit).statistic
        return self.calls[theta]


def _bisect(prof, inside, outside, q, rtol):
    # prof(inside) <= q < prof(outside)
    while abs(outside - inside) > rtol * max(abs(inside), abs(outside)):
        mid = 0.5 * (inside + outside)
        if prof(mid) <= q:
            inside = mid
        else:
            outside = mid
    return 0.5 * (inside + outside)


def _monotone_sides(calls, theta_hat, tol=1e-9):
    pts = sorted(calls.items())
    lo = [s for t, s in pts if t <= theta_hat]
    hi = [s for t, s in pts if t >= theta_hat]
    ok_lo = all(a >= b - tol * max(1.0, abs(a)) for a, b in zip(lo, lo[1:]))
    ok_hi = all(b >= a - tol * max(1.0, abs(b)) for a, b in zip(hi, hi[1:]))
    return ok_lo and ok_hi


def _grid_interval(prof, q, grid):
    accepted = [t for t in grid if prof(t) <= q]
    if not accepted:
        return math.nan, math.nan
    return min(accepted), max(accepted)


def ci_lr_inversion(sample, beta, x0, level=0.95, direction="nondecreasing",
                    quantile=None, method="bisection", rtol=1e-6,
                    grid=(0.0, 6.0, 2048), quantiles=DEFAULT_QUANTILES):
    """Confidence interval ``{theta : 2 log xi_n(theta) <= q(D, level)}``.

    The default ``method="bisection"`` expands a geometric bracket (factor
    2, at most 60 steps) from the point estimate on each side and bisects
    to relative precision ``rtol``. Every evaluated statistic is checked
    for monotonicity on either side of the point estimate; if that fails
    the interval is read off a grid instead. ``method="grid"`` scans
    ``grid = (start, stop, count)`` directly (start excluded).
    """
    level = _check_level(level)
    check_direction(direction)
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    q = float(quantile) if quantile is not None else quantiles.d(level)
    m = locate_interval(sample, x0)
    fit = fit_unconstrained(sample, beta, direction)
    theta_hat = point_estimate(fit, m)
    prof = _Profile(sample, beta, x0, direction, fit)
    diag = {"evaluations": 0, "bracketing": "ok"}

    if method == "grid":
        g0, g1, count = grid
        pts = np.linspace(g0, g1, int(count) + 1)[1:]
        lower, upper = _grid_interval(prof, q, pts.tolist())
        diag["bracketing"] = "grid"
        if math.isnan(lower):
            diag["bracketing"] = "grid-empty"
    elif method == "bisection":
        lower, upper = _bisection_interval(prof, theta_hat, q, rtol, diag,
                                           sample, fit)
        if not _monotone_sides(prof.calls, theta_hat):
            top = max(grid[1], 2 * upper if math.isfinite(upper) else 0.0)
            pts = np.linspace(0.0, top, int(grid[2]) + 1)[1:]
            lower, upper = _grid_interval(prof, q, pts.tolist())
            diag["bracketing"] = "grid-fallback"
    else:
        raise ValidationError(f"unknown inversion method {method!r}")

    diag["evaluations"] = len(prof.calls)
    at_bounds = tuple(prof(b) if (math.isfinite(b) and b > 0) else None
                      for b in (lower, upper))
    return IntervalReport("lr-inversion", level, lower, upper, theta_hat, q,
                          at_bounds, diag)


def _bisection_interval(prof, theta_hat, q, rtol, diag, sample, fit):
    if theta_hat > 0:
        lower = None
        inside, t = theta_hat, theta_hat
        for _ in range(60):
            t = t / 2
            if prof(t) > q:
                lower = _bisect(prof, inside, t, q, rtol)
                break
            inside = t
        if lower is None:
            lower = 0.0
            diag["bracketing"] = "lower-unbracketed"
        start = theta_hat
    else:
        lower = 0.0
        diag["bracketing"] = "point-estimate-zero"
        d = sample.status[:fit.levels.size]
        start = max(d.sum(), 1.0) / float(np.sum(fit.exposures)) * 1e-6

    upper = None
    inside, t = (start, start) if theta_hat > 0 else (0.0, start)
    for _ in range(60):
        t = t * 2
        if prof(t) > q:
            upper = _bisect(prof, inside, t, q, rtol) if inside > 0 else t
            break
        inside = t
    if upper is None:
        upper = math.inf
        diag["bracketing"] = "upper-unbounded"
    return lower, upper


def derivative_estimate(sample, fit, m, x0=None):
    """Numerical derivative of the fitted hazard around x0.

    The slope of the segment joining the fitted values at ``T_(m)`` and
    ``T_(m+1)``. When both lie in one block (slope zero, or no finite value
    at ``T_(m+1)``), the secant through the neighbouring blocks is used
    instead: each block is represented by its value at the midpoint of its
    time span, and the secant joins the block before and the block after
    (or the current block and its only neighbour). Returns
    ``(slope, degenerate_flag)``.
    """
    lam = fit.levels
    t = sample.time
    if m + 1 <= lam.size and lam[m] != lam[m - 1]:
        return (lam[m] - lam[m - 1]) / (t[m] - t[m - 1]), False

    blocks = fit.blocks
    j = blocks.block_of(m)
    if len(blocks) < 2:
        raise DerivativeUnavailableError(
            "fitted hazard has a single level; no derivative estimate")
    lo, hi = max(j - 1, 0), min(j + 1, len(blocks) - 1)
    mids = [_block_mid(t, *blocks.blocks[k], fit.direction) for k in (lo, hi)]
    vals = blocks.block_values[[lo, hi]]
    return float((vals[1] - vals[0]) / (mids[1] - mids[0])), True


def _block_mid(t, first, last, direction):
    # midpoint of the time span on which indices first..last hold
    if direction == "nondecreasing":
        start, stop = t[first - 1], t[last]
    else:
        start = t[first - 2] if first > 1 else 0.0
        stop = t[last - 1]
    return 0.5 * (start + stop)


def ci_asymptotic(sample, beta, x0, level=0.95, direction="nondecreasing",
                  mode="estimated", truth=None, quantile=None,
                  quantiles=DEFAULT_QUANTILES):
    """Interval from the pointwise limit law of the NPMLE.

    ``lambda_hat(x0) +/- n^{-1/3} C q(Z, 1 - alpha/2)`` with
    ``C = (4 |lambda lambda'| / Phi)^{1/3}``. In ``mode="estimated"`` the
    constant uses the fitted hazard, its numerical derivative and the
    empirical ``Phi_n(beta, x0)``; in ``mode="true-params"`` it uses
    ``truth = {"hazard": ..., "derivative": ..., "phi": ...}``.
    """
    level = _check_level(level)
    check_direction(direction)
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    prob = 1 - (1 - level) / 2
    q = float(quantile) if quantile is not None else quantiles.z(prob)
    m = locate_interval(sample, x0)
    fit = fit_unconstrained(sample, beta, direction)
    center = point_estimate(fit, m)
    diag = {"degenerate_derivative": False}
    if mode == "estimated":
        slope, flag = derivative_estimate(sample, fit, m, x0)
        diag["degenerate_derivative"] = bool(flag)
        diag["derivative"] = float(slope)
        phi = PhiEvaluator(sample, beta)(x0)
        const = (4 * abs(center * slope) / phi) ** (1 / 3)
        method = "asymptotic-npmle"
    elif mode == "true-params":
        if truth is None:
            raise ValidationError("mode='true-params' needs truth=")
        const = (4 * abs(truth["hazard"] * truth["derivative"])
                 / truth["phi"]) ** (1 / 3)
        method = "asymptotic-true"
    else:
        raise ValidationError(f"unknown mode {mode!r}")
    half = sample.n ** (-1 / 3) * const * q
    diag["constant"] = float(const)
    return IntervalReport(method, level, float(center - half),
                          float(center + half),
                          center, q, (None, None), diag)
