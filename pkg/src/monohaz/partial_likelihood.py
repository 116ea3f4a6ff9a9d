"""Cox partial likelihood for the regression coefficient and risk-set sums.

The exposure weights used by the hazard estimators are built from the
suffix sums ``S_i = sum_{l >= i} exp(beta' Z_(l))``, which :func:`risk_set`
computes once per ``(sample, beta)`` and caches on the sample.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NoEventsError, SingularHessianError, ValidationError


@dataclass(frozen=True)
class NewtonOptions:
    tol: float = 1e-10
    max_iter: int = 100
    max_halvings: int = 50
    # convergence also needs the last Newton step to be this small (relative
    # to 1 + |beta|); separates a converged fit from a divergent one whose
    # gradient has merely become tiny
    step_tol: float = 1e-5


@dataclass(frozen=True)
class BetaEstimate:
    beta_hat: np.ndarray
    iterations: int
    converged: bool
    final_gradient_norm: float
    loglik_trace: tuple = field(default=(), repr=False)

    @property
    def loglik(self):
        return self.loglik_trace[-1]


def _partial_terms(time_status_z, beta, need_hessian=True):
    """Mean log partial likelihood, gradient and Hessian at ``beta``."""
    status, z = time_status_z
    n, p = z.shape
    eta = z @ beta
    shift = eta.max()
    w = np.exp(eta - shift)
    s0 = np.cumsum(w[::-1])[::-1]
    s1 = np.cumsum((w[:, None] * z)[::-1], axis=0)[::-1]
    ev = status == 1
    ll = float(np.sum(eta[ev] - shift - np.log(s0[ev]))) / n
    zbar = s1[ev] / s0[ev, None]
    grad = (z[ev] - zbar).sum(axis=0) / n
    if not need_hessian:
        return ll, grad, None
    zz = (w[:, None, None] * z[:, :, None] * z[:, None, :])
    s2 = np.cumsum(zz[::-1], axis=0)[::-1]
    hess = -(s2[ev] / s0[ev, None, None]
             - zbar[:, :, None] * zbar[:, None, :]).sum(axis=0) / n
    return ll, grad, hess


def log_partial_likelihood(sample, beta):
    """Cox log partial likelihood (no ties) at ``beta``, unnormalized."""
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    ll, _, _ = _partial_terms((sample.status, sample.covariates), beta,
                              need_hessian=False)
    return ll * sample.n


def fit_beta(sample, opts=None):
    """Maximum partial likelihood estimate of beta by damped Newton.

    Starts at zero and halves the step until the log partial likelihood does
    not decrease. The gradient tolerance applies to the likelihood divided
    by ``n``. A likelihood that keeps increasing towards infinity in beta
    (monotone likelihood) ends with ``converged=False`` rather than an
    exception.
    """
    opts = opts or NewtonOptions()
    if not np.any(sample.status == 1):
        raise NoEventsError("partial likelihood needs at least one event")
    data = (sample.status, sample.covariates)
    beta = np.zeros(sample.p)
    ll, grad, hess = _partial_terms(data, beta)
    trace = [ll * sample.n]
    last_step = 0.0
    converged = False
    it = 0
    while True:
        gnorm = float(np.max(np.abs(grad)))
        if gnorm <= opts.tol and last_step <= opts.step_tol * (
                1.0 + float(np.max(np.abs(beta)))):
            converged = True
            break
        if it >= opts.max_iter:
            break
        try:
            if np.linalg.cond(hess) > 1e13:
                raise np.linalg.LinAlgError
            step = -np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            raise SingularHessianError(
                f"partial likelihood Hessian is singular at beta={beta}"
            ) from None
        t = 1.0
        for _ in range(opts.max_halvings + 1):
            cand = beta + t * step
            ll_new, g_new, h_new = _partial_terms(data, cand)
            if ll_new >= ll:
                break
            t *= 0.5
        else:
            # no ascent direction left at machine precision
            converged = gnorm <= opts.tol
            break
        it += 1
        last_step = float(np.max(np.abs(cand - beta)))
        beta, ll, grad, hess = cand, ll_new, g_new, h_new
        trace.append(ll * sample.n)
        assert trace[-1] >= trace[-2]
    return BetaEstimate(beta, it, converged, float(np.max(np.abs(grad))),
                        tuple(trace))


class RiskSet:
    """Risk weights ``exp(beta' Z_(l))`` and their suffix sums.

    ``suffix[k]`` (1-based k, with ``suffix[n + 1] = 0``) is
    ``sum_{l >= k} exp(beta' Z_(l))``. Index 0 is unused padding.
    """

    def __init__(self, sample, beta):
        beta = np.atleast_1d(np.asarray(beta, dtype=float))
        if beta.shape != (sample.p,):
            raise ValidationError(
                f"beta has shape {beta.shape}, expected ({sample.p},)")
        self.sample = sample
        self.beta = beta
        self.weights = np.exp(sample.covariates @ beta)
        suffix = np.zeros(sample.n + 2)
        suffix[1:-1] = np.cumsum(self.weights[::-1])[::-1]
        suffix[0] = np.nan
        suffix.flags.writeable = False
        self.suffix = suffix

    def exposures(self, direction):
        """Unnormalized exposure per index for the given direction.

        nondecreasing: ``(T_(i+1) - T_(i)) S_(i+1)`` for i = 1..n-1.
        nonincreasing: ``(T_(i) - T_(i-1)) S_(i)`` for i = 1..n, T_(0) = 0.
        """
        t = self.sample.time
        if direction == "nondecreasing":
            return np.diff(t) * self.suffix[2:-1]
        if direction == "nonincreasing":
            return np.diff(t, prepend=0.0) * self.suffix[1:-1]
        raise ValidationError(f"unknown direction {direction!r}")


def risk_set(sample, beta):
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    key = beta.tobytes()
    rs = sample._cache.get(key)
    if rs is None:
        rs = RiskSet(sample, beta)
        if len(sample._cache) > 64:
            sample._cache.clear()
        sample._cache[key] = rs
    return rs


class PhiEvaluator:
    """The empirical risk-weight function ``x -> (1/n) sum_{T_i >= x} e^{beta'Z_i}``.

    Nonincreasing and left-continuous, zero beyond ``T_(n)``.
    """

    def __init__(self, sample, beta):
        self.sample = sample
        self.risk = risk_set(sample, beta)
        self.beta = self.risk.beta

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = np.searchsorted(self.sample.time, x, side="left")
        out = self.risk.suffix[k + 1] / self.sample.n
        return float(out) if out.ndim == 0 else out


def phi_n(evaluator, x):
    return evaluator(x)


def weighted_exposure(sample, beta, i):
    """``[T_(i+1) - T_(i)] * sum_{l=i+1}^n exp(beta' Z_(l))`` for 1 <= i <= n-1."""
    if not 1 <= i <= sample.n - 1:
        raise ValidationError(f"index i={i} outside 1..{sample.n - 1}")
    rs = risk_set(sample, beta)
    return float((sample.time[i] - sample.time[i - 1]) * rs.suffix[i + 1])
