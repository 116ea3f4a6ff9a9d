"""Right-censored survival data with time-invariant covariates.

Data are held as an :class:`OrderedSample`, whose follow-up times are sorted
and strictly increasing. Every estimator in the package indexes observations
by their rank in this ordering.
"""

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import (BoundaryError, OutOfRangeError, ParseError, TieError,
                     ValidationError)

TIE_POLICIES = ("error", "deterministic-jitter")


class SurvivalRecord(NamedTuple):
    time: float
    status: int
    covariates: tuple


@dataclass(frozen=True)
class IngestConfig:
    """Options for :func:`load_csv`.

    tie_breaking : {"error", "deterministic-jitter"}
        With "error" (the default) duplicate follow-up times raise
        :class:`TieError`. With "deterministic-jitter" the k-th repeat of a
        value (in input order) is shifted by ``k * 1e-9 * max(time)``.
    """

    tie_breaking: str = "error"

    def __post_init__(self):
        if self.tie_breaking not in TIE_POLICIES:
            raise ValidationError(
                f"tie_breaking must be one of {TIE_POLICIES}, "
                f"got {self.tie_breaking!r}")


class OrderedSample:
    """Validated survival sample sorted by follow-up time.

    Parameters
    ----------
    time, status, covariates : array-like
        Follow-up times, event indicators (1 = event, 0 = censored) and an
        ``(n, p)`` covariate matrix (a 1-d array is read as ``p = 1``). Rows
        are sorted here; ties raise :class:`TieError`.

    Attributes
    ----------
    time : ndarray, shape (n,)
    status : ndarray of int, shape (n,)
    covariates : ndarray, shape (n, p)
    order : ndarray of int
        Permutation such that ``time = input_time[order]``.
    """

    __slots__ = ("time", "status", "covariates", "order", "_cache")

    def __init__(self, time, status, covariates):
        t = _as_finite(time, "time").reshape(-1)
        d = _as_finite(status, "status").reshape(-1)
        z = _as_finite(covariates, "covariates")
        if z.ndim == 1:
            z = z.reshape(-1, 1)
        if z.ndim != 2 or z.shape[0] != t.size or d.size != t.size:
            raise ValidationError(
                "time, status and covariates must describe the same rows")
        if t.size < 2:
            raise ValidationError(f"need at least 2 observations, got {t.size}")
        if np.any(t < 0):
            raise ValidationError("follow-up times must be nonnegative")
        if not np.all((d == 0) | (d == 1)):
            bad = sorted(set(d[(d != 0) & (d != 1)].tolist()))
            raise ValidationError(f"status must be 0 or 1, found {bad}")

        order = np.argsort(t, kind="stable")
        t = t[order]
        dup = t[1:] == t[:-1]
        if np.any(dup):
            raise TieError("duplicate follow-up times: "
                           f"{sorted(set(t[1:][dup].tolist()))}",
                           values=np.unique(t[1:][dup]))

        for name, arr in (("time", t), ("status", d[order].astype(np.int64)),
                          ("covariates", z[order]), ("order", order)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        # derived quantities keyed by beta; see partial_likelihood.risk_set
        object.__setattr__(self, "_cache", {})

    def __setattr__(self, name, value):
        raise AttributeError("OrderedSample is immutable")

    @property
    def n(self):
        return self.time.size

    @property
    def p(self):
        return self.covariates.shape[1]

    @property
    def records(self):
        return [SurvivalRecord(float(t), int(d), tuple(map(float, z)))
                for t, d, z in zip(self.time, self.status, self.covariates)]

    def scaled(self, factor):
        """Return a copy with every follow-up time multiplied by ``factor``."""
        return OrderedSample(self.time * factor, self.status, self.covariates)

    def __len__(self):
        return self.n

    __hash__ = object.__hash__

    def __eq__(self, other):
        if not isinstance(other, OrderedSample):
            return NotImplemented
        return (np.array_equal(self.time, other.time)
                and np.array_equal(self.status, other.status)
                and np.array_equal(self.covariates, other.covariates))

    def __repr__(self):
        return (f"OrderedSample(n={self.n}, p={self.p}, "
                f"events={int(self.status.sum())})")


def _as_finite(values, name):
    try:
        arr = np.array(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{name}: not numeric ({exc})") from None
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"{name}: non-finite values present")
    return arr


def jitter_ties(time):
    """Separate repeated values by multiples of ``1e-9 * max(time)``.

    The k-th repeat of a value in input order (k = 0 for the first
    occurrence) is moved up by ``k * eps``.
    """
    time = np.asarray(time, dtype=float)
    eps = 1e-9 * float(np.max(time))
    seen = {}
    out = time.copy()
    for i, t in enumerate(time):
        k = seen.get(t, 0)
        out[i] = t + k * eps
        seen[t] = k + 1
    return out


def load_csv(path, config=None):
    """Read a CSV file with header ``time,status,z1,...,zp``.

    Blank lines are skipped. Raises :class:`ParseError` for cells that are
    not finite numbers, :class:`ValidationError` for a malformed header or a
    status outside {0, 1}, and :class:`TieError` for duplicate times unless
    ``config.tie_breaking == "deterministic-jitter"``.
    """
    config = config or IngestConfig()
    text = Path(path).read_text(encoding="utf-8")
    return parse_csv(text, config)


def parse_csv(text, config=None):
    config = config or IngestConfig()
    rows = [r for r in csv.reader(io.StringIO(text))
            if r and any(c.strip() for c in r)]
    if not rows:
        raise ValidationError("empty CSV")
    header = [c.strip() for c in rows[0]]
    p = len(header) - 2
    expected = ["time", "status"] + [f"z{j}" for j in range(1, p + 1)]
    if p < 1 or header != expected:
        raise ValidationError(
            f"header must be time,status,z1,...,zp; got {','.join(header)}")

    values = np.empty((len(rows) - 1, p + 2))
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != p + 2:
            raise ParseError(f"line {i}: expected {p + 2} fields, "
                             f"got {len(row)}")
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"line {i}: cannot parse {cell!r}") from None
            if not math.isfinite(v):
                raise ParseError(f"line {i}: non-finite value {cell!r}")
            values[i - 2, j] = v

    time = values[:, 0]
    if config.tie_breaking == "deterministic-jitter":
        time = jitter_ties(time)
    return OrderedSample(time, values[:, 1], values[:, 2:])


def to_csv(sample):
    """Serialize ``sample`` in the format read by :func:`load_csv`."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["time", "status"]
                    + [f"z{j}" for j in range(1, sample.p + 1)])
    for t, d, z in zip(sample.time, sample.status, sample.covariates):
        writer.writerow([repr(float(t)), int(d)] + [repr(float(v)) for v in z])
    return buf.getvalue()


def write_csv(sample, path):
    Path(path).write_text(to_csv(sample), encoding="utf-8")


def locate_interval(sample, x0):
    """Return the 1-based index m with ``T_(m) < x0 < T_(m+1)``."""
    t = sample.time
    x0 = float(x0)
    if not (t[0] < x0 < t[-1]):
        raise OutOfRangeError(
            f"x0={x0} must lie strictly between T_(1)={t[0]} "
            f"and T_(n)={t[-1]}")
    m = int(np.searchsorted(t, x0, side="left"))
    if t[m] == x0:
        raise BoundaryError(
            f"x0={x0} equals the observed time T_({m + 1}); "
            "perturb x0 slightly")
    return m
