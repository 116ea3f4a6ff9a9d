"""Coverage and length study for pointwise hazard intervals.

Design: scalar covariate ``Z ~ U(0, 1)``, Weibull baseline with hazard
``(k/s) (x/s)^(k-1)``, event time drawn by inversion from the conditional
hazard ``lambda_0(x) exp(beta0 Z)``, independent ``U(0, 1)`` censoring.
The target is the baseline hazard at x0, by default the baseline median.
"""

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

from .data import OrderedSample
from .errors import MonohazError, ValidationError
from .inference import ci_asymptotic, ci_lr_inversion
from .partial_likelihood import fit_beta

METHODS = ("LR", "AD", "TD")


@dataclass(frozen=True)
class SimConfig:
    n: int
    replicates: int
    seed: int = 0
    beta0: float = 0.5
    weibull_shape: float = 2.0
    weibull_scale: float = 1.0
    x0: float = None
    level: float = 0.95
    methods: tuple = METHODS
    direction: str = "nondecreasing"
    workers: int = None

    def __post_init__(self):
        if self.x0 is None:
            median = self.weibull_scale * math.log(2) ** (1 / self.weibull_shape)
            object.__setattr__(self, "x0", median)
        object.__setattr__(self, "methods", tuple(self.methods))
        if int(self.n) < 2 or int(self.replicates) < 1:
            raise ValidationError("need n >= 2 and replicates >= 1")
        if not set(self.methods) <= set(METHODS):
            raise ValidationError(f"methods must be a subset of {METHODS}")
        if not 0 < self.x0 < 1:
            raise ValidationError("x0 must lie in (0, 1) under U(0,1) censoring")

    def to_dict(self):
        d = asdict(self)
        d["methods"] = list(self.methods)
        return d

    @classmethod
    def from_dict(cls, d):
        known = cls.__dataclass_fields__
        extra = set(d) - set(known)
        if extra:
            raise ValidationError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            try:
                return cls.from_dict(json.load(fh))
            except json.JSONDecodeError as exc:
                raise ValidationError(f"bad config JSON: {exc}") from exc


def baseline_hazard(config, x):
    k, s = config.weibull_shape, config.weibull_scale
    return (k / s) * (x / s) ** (k - 1)


def baseline_hazard_derivative(config, x):
    k, s = config.weibull_shape, config.weibull_scale
    return (k / s) * ((k - 1) / s) * (x / s) ** (k - 2)


def true_phi(config, x=None):
    """``E[1{T >= x} exp(beta0 Z)]`` under the design, by quadrature."""
    x = config.x0 if x is None else x
    b, k, s = config.beta0, config.weibull_shape, config.weibull_scale
    surv = (x / s) ** k

    def integrand(z):
        w = math.exp(b * z)
        return w * math.exp(-surv * w)

    val, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-10, epsrel=1e-8)
    return (1.0 - min(x, 1.0)) * val


def truth(config):
    x0 = config.x0
    return {"hazard": baseline_hazard(config, x0),
            "derivative": baseline_hazard_derivative(config, x0),
            "phi": true_phi(config)}


def latent_draws(config, r):
    """Covariates, event times and censoring times of replicate ``r``."""
    rng = np.random.default_rng(np.random.SeedSequence(config.seed,
                                                       spawn_key=(r,)))
    n = int(config.n)
    z = rng.uniform(0.0, 1.0, n)
    u = rng.uniform(0.0, 1.0, n)
    c = rng.uniform(0.0, 1.0, n)
    x = config.weibull_scale * (-np.log(u) / np.exp(config.beta0 * z)) \
        ** (1 / config.weibull_shape)
    return z, x, c


def generate_replicate(config, r):
    """Sample for replicate ``r``; depends only on ``(config.seed, r)``."""
    z, x, c = latent_draws(config, r)
    t = np.minimum(x, c)
    return OrderedSample(t, (x <= c).astype(int), z[:, None])


def _interval(method, sample, beta, config, true_params):
    if method == "LR":
        return ci_lr_inversion(sample, beta, config.x0, config.level,
                               config.direction)
    if method == "AD":
        return ci_asymptotic(sample, beta, config.x0, config.level,
                             config.direction)
    return ci_asymptotic(sample, beta, config.x0, config.level,
                         config.direction, mode="true-params",
                         truth=true_params)


def run_replicate(config, r, true_params=None):
    """One record per method: bounds, length, coverage flag, error name."""
    true_params = true_params or truth(config)
    target = true_params["hazard"]
    records = []
    try:
        sample = generate_replicate(config, r)
        est = fit_beta(sample)
    except MonohazError as exc:
        return [{"replicate": r, "method": m, "error": type(exc).__name__,
                 "covered": False} for m in config.methods], None
    trace = np.asarray(est.loglik_trace)
    beta_info = {"replicate": r, "beta_hat": est.beta_hat.tolist(),
                 "converged": est.converged,
                 "trace_monotone": bool(np.all(np.diff(trace) >= 0))}
    for m in config.methods:
        rec = {"replicate": r, "method": m, "error": None}
        try:
            rep = _interval(m, sample, est.beta_hat, config, true_params)
        except MonohazError as exc:
            rec.update(error=type(exc).__name__, covered=False)
        else:
            rec.update(lower=rep.lower, upper=rep.upper,
                       point_estimate=rep.point_estimate,
                       covered=bool(rep.contains(target)),
                       length=rep.length)
            if not math.isfinite(rep.length):
                rec["error"] = "UnboundedInterval"
            if rep.diagnostics.get("degenerate_derivative"):
                rec["degenerate_derivative"] = True
        records.append(rec)
    return records, beta_info


def _run_range(args):
    config, start, stop, true_params = args
    out = []
    for r in range(start, stop):
        out.append(run_replicate(config, r, true_params))
    return out


@dataclass
class SimReport:
    config: SimConfig
    summary: dict
    records: list = field(default_factory=list)
    betas: list = field(default_factory=list)

    def to_dict(self):
        return {"schema": "monohaz/1", "config": self.config.to_dict(),
                "summary": self.summary, "records": self.records,
                "betas": self.betas}

    @classmethod
    def from_dict(cls, d):
        return cls(SimConfig.from_dict(d["config"]), d["summary"],
                   d["records"], d["betas"])

    def table_csv(self):
        """One row mirroring the published table: n, then AL/CP per method."""
        head, row = ["n"], [str(self.config.n)]
        for m in self.config.methods:
            s = self.summary[m]
            head += [f"{m}_AL", f"{m}_CP"]
            row += [f"{s['AL']:.3f}", f"{s['CP']:.3f}"]
        return ",".join(head) + "\n" + ",".join(row) + "\n"


def _batch_se(values, n_batches=100):
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return math.nan
    means = [b.mean() for b in np.array_split(values, min(n_batches,
                                                          values.size))]
    return float(np.std(means, ddof=1) / math.sqrt(len(means)))


def summarize(config, records):
    summary = {}
    for m in config.methods:
        recs = [x for x in records if x["method"] == m]
        covered = [float(x["covered"]) for x in recs]
        lengths = [x["length"] for x in recs
                   if x.get("error") is None and "length" in x]
        failures = {}
        for x in recs:
            if x.get("error"):
                failures[x["error"]] = failures.get(x["error"], 0) + 1
        summary[m] = {
            "AL": float(np.mean(lengths)) if lengths else math.nan,
            "CP": float(np.mean(covered)),
            "AL_se": _batch_se(lengths), "CP_se": _batch_se(covered),
            "n_defined": len(lengths), "failures": failures,
            "degenerate_derivative": sum(bool(x.get("degenerate_derivative"))
                                         for x in recs)}
    return summary


def run_study(config, workers=None):
    """Run all replicates and aggregate length and coverage per method.

    Replicates are split into contiguous ranges and may run in worker
    processes (``workers``, else ``config.workers``, else
    ``MONOHAZ_THREADS``, else 1). Each replicate depends only on its index,
    so the report does not depend on the worker count.
    """
    workers = workers or config.workers or \
        int(os.environ.get("MONOHAZ_THREADS", "0") or 0) or 1
    true_params = truth(config)
    reps = int(config.replicates)
    size = max(1, math.ceil(reps / (4 * workers)))
    jobs = [(config, s, min(s + size, reps), true_params)
            for s in range(0, reps, size)]
    if workers == 1:
        parts = [_run_range(j) for j in jobs]
    else:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_run_range, jobs))
    records, betas = [], []
    for part in parts:
        for recs, beta_info in part:
            records.extend(recs)
            if beta_info is not None:
                betas.append(beta_info)
    return SimReport(config, summarize(config, records), records, betas)
