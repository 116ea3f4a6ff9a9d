"""Independent reference implementations used only by the tests.

Nothing here calls PAVA or the suffix-sum machinery of the package; each
oracle recomputes its quantity from the raw data by a different route
(exhaustive enumeration, convex hulls, double loops, bisection).
"""

import itertools
import math

import numpy as np

from monohaz.data import OrderedSample


def random_sample(rng, n, p=1, event_rate=0.7, beta_scale=1.0):
    """Random sample with distinct positive times, plus a random beta."""
    t = np.cumsum(rng.uniform(0.05, 1.0, n))
    rng.shuffle(t)
    d = (rng.uniform(size=n) < event_rate).astype(int)
    z = rng.normal(size=(n, p))
    beta = rng.normal(scale=beta_scale, size=p)
    return OrderedSample(t, d, z), beta


# exposures ------------------------------------------------------------------

def naive_exposures(sample, beta, direction):
    """Double-loop exposure weights (no suffix sums)."""
    t, z = sample.time, sample.covariates
    n = sample.n
    w = [math.exp(float(np.dot(z[l], beta))) for l in range(n)]
    out = []
    if direction == "nondecreasing":
        for i in range(n - 1):
            at_risk = sum(w[l] for l in range(n) if t[l] > t[i])
            out.append((t[i + 1] - t[i]) * at_risk)
    else:
        for i in range(n):
            prev = t[i - 1] if i > 0 else 0.0
            at_risk = sum(w[l] for l in range(n) if t[l] >= t[i])
            out.append((t[i] - prev) * at_risk)
    return np.array(out)


# partition oracles ----------------------------------------------------------

def _phi(d, e, lam):
    total = 0.0
    for di, ei, li in zip(d, e, lam):
        if di:
            if li <= 0:
                return -math.inf
            total += math.log(li)
        total -= li * ei
    return total


def _compositions(k):
    """All splits of range(k) into consecutive blocks."""
    for cuts in itertools.product((False, True), repeat=max(k - 1, 0)):
        blocks, start = [], 0
        for j, c in enumerate(cuts, start=1):
            if c:
                blocks.append((start, j))
                start = j
        blocks.append((start, k))
        yield blocks


def _monotone(vals, decreasing):
    pairs = zip(vals, vals[1:])
    if decreasing:
        return all(a >= b for a, b in pairs)
    return all(a <= b for a, b in pairs)


def partition_oracle(d, e, decreasing=False):
    """Maximize ``sum d log lam - lam e`` over monotone ``lam`` by
    enumerating block partitions with block values ``sum d / sum e``."""
    d, e = list(map(float, d)), list(map(float, e))
    best, best_lam = -math.inf, None
    for blocks in _compositions(len(d)):
        lam = []
        for a, b in blocks:
            v = sum(d[a:b]) / sum(e[a:b])
            lam.extend([v] * (b - a))
        if not _monotone(lam, decreasing):
            continue
        val = _phi(d, e, lam)
        if val > best:
            best, best_lam = val, lam
    return best, np.array(best_lam)


def _bounded_oracle(d, e, theta, decreasing, bound_side):
    """Monotone maximization with every value on one side of ``theta``.

    ``bound_side="upper"``: values <= theta, pinned values form a suffix
    (nondecreasing) or prefix (nonincreasing) set equal to theta.
    ``bound_side="lower"``: values >= theta, pinned prefix/suffix.
    """
    k = len(d)
    if k == 0:
        return 0.0, np.empty(0)
    # pinned indices sit next to the theta piece
    pin_at_end = (bound_side == "upper") != decreasing
    best, best_lam = -math.inf, None
    for n_pin in range(k + 1):
        free = range(0, k - n_pin) if pin_at_end else range(n_pin, k)
        fd = [d[i] for i in free]
        fe = [e[i] for i in free]
        for blocks in _compositions(len(fd)) if fd else [[]]:
            lam_free = []
            for a, b in blocks:
                v = sum(fd[a:b]) / sum(fe[a:b])
                lam_free.extend([v] * (b - a))
            lam = (lam_free + [theta] * n_pin if pin_at_end
                   else [theta] * n_pin + lam_free)
            if not _monotone(lam, decreasing):
                continue
            if bound_side == "upper" and any(v > theta for v in lam):
                continue
            if bound_side == "lower" and any(v < theta for v in lam):
                continue
            val = _phi(d, e, lam)
            if val > best + 1e-15 * abs(best) or best_lam is None:
                best, best_lam = val, lam
    return best, np.array(best_lam)


def constrained_oracle(d, e_mod, theta_e, m, theta, direction):
    """Maximum of the constrained reduced loglikelihood and its maximizer.

    ``e_mod`` are exposures with the split applied at the special index;
    the theta piece contributes ``-theta * theta_e``.
    """
    d = list(map(float, d))
    e = list(map(float, e_mod))
    dec = direction == "nonincreasing"
    left_side = "lower" if dec else "upper"
    right_side = "upper" if dec else "lower"
    lv, ll = _bounded_oracle(d[:m], e[:m], theta, dec, left_side)
    rv, rl = _bounded_oracle(d[m:], e[m:], theta, dec, right_side)
    return lv + rv - theta * theta_e, np.concatenate([ll, rl])


# hull oracle ----------------------------------------------------------------

def lower_hull(points):
    """Andrew's monotone chain, lower hull, left to right."""
    pts = sorted(points)
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def hull_left_slopes(x, y):
    """Left derivative of the lower convex hull at x_1..x_k."""
    hull = lower_hull(list(zip(map(float, x), map(float, y))))
    hx = [p[0] for p in hull]
    out = []
    for xj in x[1:]:
        k = next(i for i in range(1, len(hull)) if hx[i] >= xj)
        (x1, y1), (x2, y2) = hull[k - 1], hull[k]
        out.append((y2 - y1) / (x2 - x1))
    return np.array(out)


def minmax_slopes(x, y):
    """GCM left slopes by the max-min formula over all chords.

    The slope on ``(x_{j-1}, x_j]`` is ``max_{i<j} min_{l>=j}`` of the chord
    slope between points i and l; cubic, so only for small diagrams.
    """
    k = len(x)
    out = []
    for j in range(1, k):
        out.append(max(min((y[l] - y[i]) / (x[l] - x[i])
                           for l in range(j, k)) for i in range(j)))
    return np.array(out)


# likelihoods ----------------------------------------------------------------

def naive_cumhaz(hazard, x):
    """Integral of a StepHazard from 0 to x by summing its pieces."""
    d = hazard.to_dict()
    bp, vals = d["breakpoints"], d["values"]
    total = 0.0
    for k, v in enumerate(vals):
        a = bp[k]
        b = bp[k + 1] if k + 1 < len(bp) else math.inf
        if x > a:
            total += v * (min(x, b) - a)
    if d["tail"] == "unbounded" and x > bp[-1]:
        return math.inf
    return total


def naive_loglik(sample, beta, hazard, direction):
    """Pseudo-loglikelihood ``sum Delta [log lam(T) + beta'Z] -
    sum e^{beta'Z} Lambda(T)`` minus the ``beta'Z`` event terms, with the
    unbounded tail point of a nondecreasing fit left out."""
    t, d, z = sample.time, sample.status, sample.covariates
    n = sample.n
    total = 0.0
    for i in range(n):
        eta = float(np.dot(z[i], beta))
        if d[i] and not (direction == "nondecreasing" and i == n - 1):
            total += math.log(hazard(t[i]))
        total -= math.exp(eta) * naive_cumhaz(hazard, t[i])
    return total


def score_root(sample, lo=-20.0, hi=20.0, tol=1e-12):
    """Root of the scalar Cox score by bisection on a double-loop score."""
    t, d = sample.time, sample.status
    z = sample.covariates[:, 0]

    def score(b):
        s = 0.0
        for i in range(sample.n):
            if d[i]:
                risk = t >= t[i]
                w = np.exp(b * z[risk])
                s += z[i] - float(np.sum(w * z[risk]) / np.sum(w))
        return s

    flo, fhi = score(lo), score(hi)
    assert flo > 0 > fhi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if score(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
