import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (hull_left_slopes, naive_exposures, naive_loglik,
                     partition_oracle, random_sample)
from monohaz.data import OrderedSample
from monohaz.errors import (DegenerateSegmentError, NoEventsError,
                            ValidationError)
from monohaz.inference import loglik
from monohaz.isotonic import (BlockDecomposition, CsDiagram, StepHazard,
                              build_csd, check_fenchel_unconstrained,
                              fit_unconstrained, gcm_left_slopes,
                              lcm_left_slopes)

DIRECTIONS = ("nondecreasing", "nonincreasing")


def toy():
    return OrderedSample([1.0, 2.0], [1, 1], [[0.0], [0.0]])


def test_csd_examples():
    assert build_csd(toy(), [0.0], "nondecreasing").points == \
        [(0.0, 0.0), (0.5, 0.5)]
    assert build_csd(toy(), [0.0], "nonincreasing").points == \
        [(0.0, 0.0), (1.0, 0.5), (1.5, 1.0)]


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_csd_increments_match_double_loop(seed):
    rng = np.random.default_rng(seed)
    s, beta = random_sample(rng, 6)
    for direction in DIRECTIONS:
        diag = build_csd(s, beta, direction)
        e = naive_exposures(s, beta, direction)
        assert np.allclose(np.diff(diag.x), e / s.n, rtol=1e-12, atol=0)
        assert np.allclose(np.diff(diag.y), s.status[:e.size] / s.n,
                           rtol=0, atol=1e-15)


def test_gcm_examples():
    assert gcm_left_slopes(CsDiagram([0, 1, 2], [0, 1, 2])).tolist() == [1, 1]
    slopes = gcm_left_slopes(CsDiagram([0, 1, 2], [0, 1, 1.5]))
    assert np.allclose(slopes, [0.75, 0.75], rtol=0, atol=1e-15)
    with pytest.raises(DegenerateSegmentError):
        gcm_left_slopes(CsDiagram([0, 1, 1], [0, 1, 2]))


def test_diagram_validation():
    with pytest.raises(ValidationError):
        CsDiagram([1, 2], [0, 1])
    with pytest.raises(ValidationError):
        CsDiagram([0, 2, 1], [0, 1, 2])
    d = CsDiagram.from_increments([1, 2], [3, 4])
    assert d.points == [(0, 0), (1, 3), (3, 7)]
    assert d.negated().points == [(0, 0), (1, -3), (3, -7)]


def random_diagram(rng, k):
    dx = rng.exponential(size=k)
    dy = rng.normal(size=k) * rng.choice([0.1, 1.0, 10.0])
    return CsDiagram.from_increments(dx, dy)


@given(st.integers(0, 2**32 - 1), st.integers(1, 11))
@settings(max_examples=200, deadline=None)
def test_gcm_matches_hull_oracle(seed, k):
    d = random_diagram(np.random.default_rng(seed), k)
    assert np.allclose(gcm_left_slopes(d), hull_left_slopes(d.x, d.y),
                       rtol=0, atol=1e-10)


@given(st.integers(0, 2**32 - 1), st.integers(1, 40))
@settings(max_examples=100, deadline=None)
def test_lcm_is_negated_gcm_of_negated_diagram(seed, k):
    d = random_diagram(np.random.default_rng(seed), k)
    assert np.array_equal(lcm_left_slopes(d), -gcm_left_slopes(d.negated()))


@given(st.integers(0, 2**32 - 1), st.integers(3, 6))
@settings(max_examples=60, deadline=None)
def test_fit_matches_partition_oracle(seed, n):
    rng = np.random.default_rng(seed)
    s, beta = random_sample(rng, n, event_rate=0.6)
    for direction in DIRECTIONS:
        d = s.status[: n - 1 if direction == "nondecreasing" else n]
        if direction == "nondecreasing" and not d.any():
            with pytest.raises(NoEventsError):
                fit_unconstrained(s, beta, direction)
            continue
        fit = fit_unconstrained(s, beta, direction)
        best, lam = partition_oracle(d, naive_exposures(s, beta, direction),
                                     direction == "nonincreasing")
        assert abs(loglik(s, beta, fit) - best) <= 1e-9
        assert np.allclose(fit.levels, lam, rtol=0, atol=1e-7)


def test_toy_fit_single_block():
    hazard, blocks = fit_unconstrained(toy(), [0.0], "nondecreasing")
    assert blocks.blocks == ((1, 1),)
    assert hazard(0.5) == 0.0 and hazard(1.0) == 1.0 and hazard(1.9) == 1.0
    assert hazard(2.0) == math.inf
    assert hazard.tail == "unbounded"
    assert hazard.to_dict()["values"] == [0.0, 1.0]


def test_zero_covariates_reduce_to_counts():
    t = np.array([0.5, 1.2, 1.9, 3.0, 3.3, 4.1])
    d = np.array([0, 1, 1, 0, 1, 1])
    s = OrderedSample(t, d, np.zeros(6))
    fit = fit_unconstrained(s, [1.3], "nondecreasing")
    # plain no-covariate diagram: exposures (T_(i+1)-T_(i)) (n - i)
    e = np.diff(t) * (6 - np.arange(1, 6))
    _, lam = partition_oracle(d[:5], e)
    assert np.allclose(fit.levels, lam, rtol=1e-12, atol=0)


@given(st.integers(0, 2**32 - 1), st.integers(2, 80))
@settings(max_examples=60, deadline=None)
def test_block_values_closed_form_and_monotone(seed, n):
    rng = np.random.default_rng(seed)
    s, beta = random_sample(rng, n)
    for direction in DIRECTIONS:
        try:
            fit = fit_unconstrained(s, beta, direction)
        except NoEventsError:
            continue
        lev = fit.levels
        step = np.diff(lev)
        assert np.all(step >= 0) if direction == "nondecreasing" \
            else np.all(step <= 0)
        vals = fit.blocks.block_values
        assert np.all(np.diff(vals) != 0)
        for (a, b), v in zip(fit.blocks.blocks, vals):
            num = s.status[a - 1:b].sum()
            den = fit.exposures[a - 1:b].sum()
            assert math.isclose(v, num / den, rel_tol=1e-12, abs_tol=0)
        covered = [i for a, b in fit.blocks.blocks for i in range(a, b + 1)]
        assert covered == list(range(1, lev.size + 1))


@given(st.integers(0, 2**32 - 1), st.sampled_from([0.01, 0.5, 3.0, 1e3]))
@settings(max_examples=40, deadline=None)
def test_time_scaling_equivariance(seed, c):
    rng = np.random.default_rng(seed)
    s, beta = random_sample(rng, 25)
    for direction in DIRECTIONS:
        try:
            a = fit_unconstrained(s, beta, direction)
        except NoEventsError:
            continue
        b = fit_unconstrained(s.scaled(c), beta, direction)
        assert np.allclose(b.levels, a.levels / c, rtol=1e-12, atol=0)


@given(st.integers(0, 2**32 - 1), st.integers(5, 200))
@settings(max_examples=60, deadline=None)
def test_fenchel_conditions_hold(seed, n):
    rng = np.random.default_rng(seed)
    s, beta = random_sample(rng, n, event_rate=rng.uniform(0.2, 0.9))
    for direction in DIRECTIONS:
        try:
            fit = fit_unconstrained(s, beta, direction)
        except NoEventsError:
            continue
        assert check_fenchel_unconstrained(s, beta, fit).ok


def test_fenchel_detects_perturbed_block():
    rng = np.random.default_rng(5)
    s, beta = random_sample(rng, 40)
    fit = fit_unconstrained(s, beta, "nondecreasing")
    a, b = fit.blocks.blocks[-1]
    lev = fit.levels.copy()
    lev[a - 1:b] *= 1.1
    diag = check_fenchel_unconstrained(s, beta, lev, "nondecreasing")
    assert diag.equality_residual > 1e-3
    assert not diag.ok


def test_single_block_total_gradient_vanishes():
    s = OrderedSample([1.0, 1.2, 3.0], [1, 1, 0], [[0.0], [0.5], [1.0]])
    fit = fit_unconstrained(s, [0.2], "nondecreasing")
    assert len(fit.blocks) == 1
    diag = check_fenchel_unconstrained(s, [0.2], fit)
    assert abs(diag.total_gradient) <= 1e-12


def test_leading_censored_block_is_zero():
    s = OrderedSample([1.0, 2.0, 3.0, 4.0], [0, 0, 1, 1], [0.0] * 4)
    fit = fit_unconstrained(s, [0.0], "nondecreasing")
    assert fit.levels[0] == 0.0 and fit.levels[2] > 0
    assert check_fenchel_unconstrained(s, [0.0], fit).ok


def test_zero_exposure_rejected():
    s = OrderedSample([0.0, 1.0, 2.0], [1, 1, 0], [0.0] * 3)
    with pytest.raises(DegenerateSegmentError):
        fit_unconstrained(s, [0.0], "nonincreasing")


@given(st.integers(0, 2**32 - 1), st.integers(2, 20))
@settings(max_examples=40, deadline=None)
def test_loglik_matches_direct_integration(seed, n):
    rng = np.random.default_rng(seed)
    s, beta = random_sample(rng, n)
    for direction in DIRECTIONS:
        try:
            fit = fit_unconstrained(s, beta, direction)
        except NoEventsError:
            continue
        direct = naive_loglik(s, beta, fit.hazard, direction)
        assert math.isclose(loglik(s, beta, fit), direct, rel_tol=1e-12,
                            abs_tol=1e-12)


def test_step_hazard_round_trip_and_conventions():
    h = StepHazard("nonincreasing", np.array([0.0, 1.0, 2.0]),
                   np.array([3.0, 1.0]))
    assert h(0.5) == 3.0 and h(1.0) == 3.0 and h(1.5) == 1.0
    assert h(2.0) == 1.0 and h(2.5) == 0.0
    again = StepHazard.from_dict(h.to_dict())
    assert np.array_equal(again.breakpoints, h.breakpoints)
    assert np.array_equal(again.values, h.values)


def test_block_decomposition_merges_equal_runs():
    b = BlockDecomposition.from_levels([0.0, 0.0, 1.0, 2.0, 2.0])
    assert b.blocks == ((1, 2), (3, 3), (4, 5))
    assert b.block_of(4) == 2
