import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monohaz.data import (IngestConfig, OrderedSample, jitter_ties, load_csv,
                          locate_interval, parse_csv, to_csv, write_csv)
from monohaz.errors import (BoundaryError, OutOfRangeError, ParseError,
                            TieError, ValidationError)
from monohaz.simulation import SimConfig, generate_replicate


def test_rows_are_sorted_by_time():
    s = OrderedSample([2.0, 1.0], [1, 0], [[0.3], [0.7]])
    assert s.time.tolist() == [1.0, 2.0]
    assert s.status.tolist() == [0, 1]
    assert s.covariates[:, 0].tolist() == [0.7, 0.3]
    assert s.n == 2 and s.p == 1


def test_duplicate_times_raise_tie_error():
    with pytest.raises(TieError) as info:
        OrderedSample([1.0, 1.0], [1, 1], [0, 0])
    assert info.value.values == (1.0,)


def test_jitter_separates_ties_in_input_order():
    out = jitter_ties([3.0, 1.0, 3.0, 3.0])
    eps = 3e-9
    assert out.tolist() == [3.0, 1.0, 3.0 + eps, 3.0 + 2 * eps]
    s = parse_csv("time,status,z1\n1,1,0\n1,0,1\n",
                  IngestConfig("deterministic-jitter"))
    assert s.time[1] > s.time[0]


@pytest.mark.parametrize("bad", [
    dict(time=[1.0], status=[1], covariates=[0]),
    dict(time=[-1.0, 2.0], status=[1, 1], covariates=[0, 0]),
    dict(time=[1.0, 2.0], status=[1, 2], covariates=[0, 0]),
    dict(time=[1.0, 2.0], status=[1, 1], covariates=[0, 0, 0]),
])
def test_invalid_inputs_rejected(bad):
    with pytest.raises(ValidationError):
        OrderedSample(**bad)


def test_non_finite_values_raise_parse_error():
    with pytest.raises(ParseError):
        OrderedSample([1.0, np.inf], [1, 1], [0, 0])
    with pytest.raises(ParseError):
        parse_csv("time,status,z1\n1,1,nan\n2,1,0\n")
    with pytest.raises(ParseError):
        parse_csv("time,status,z1\n1,1,abc\n2,1,0\n")


def test_csv_header_and_blank_lines():
    s = parse_csv("time,status,z1,z2\n\n2,1,0,1\n\n1,0,1,0\n")
    assert s.p == 2 and s.time.tolist() == [1.0, 2.0]
    with pytest.raises(ValidationError):
        parse_csv("t,status,z1\n1,1,0\n2,1,0\n")
    with pytest.raises(ValidationError):
        parse_csv("time,status,z1\n1,3,0\n2,1,0\n")


def test_sample_is_immutable():
    s = OrderedSample([1.0, 2.0], [1, 0], [0, 1])
    with pytest.raises(AttributeError):
        s.time = None
    with pytest.raises(ValueError):
        s.time[0] = 5.0


def test_simulated_file_round_trip(tmp_path):
    sample = generate_replicate(SimConfig(n=100, replicates=1, seed=3), 0)
    path = tmp_path / "sim.csv"
    write_csv(sample, path)
    again = load_csv(path)
    assert again.n == 100 and again.p == 1
    assert again == sample
    assert to_csv(again) == to_csv(sample)


@given(st.integers(0, 2**32 - 1), st.integers(2, 40))
@settings(max_examples=50, deadline=None)
def test_serialization_is_idempotent(seed, n):
    rng = np.random.default_rng(seed)
    s = OrderedSample(rng.permutation(n) + rng.uniform(0, 0.5, n),
                      rng.integers(0, 2, n), rng.normal(size=(n, 2)))
    once = parse_csv(to_csv(s))
    assert once == s
    assert parse_csv(to_csv(once)) == once


def test_locate_interval_examples():
    s = OrderedSample([1.0, 2.0, 3.0, 4.0], [1] * 4, [0] * 4)
    assert locate_interval(s, 2.5) == 2
    with pytest.raises(OutOfRangeError):
        locate_interval(s, 0.5)
    with pytest.raises(OutOfRangeError):
        locate_interval(s, 4.0)
    with pytest.raises(BoundaryError, match="perturb"):
        locate_interval(s, 3.0)


@given(st.integers(0, 2**32 - 1), st.integers(2, 50), st.floats(0.01, 0.99))
@settings(max_examples=100, deadline=None)
def test_locate_interval_brackets_x0(seed, n, frac):
    rng = np.random.default_rng(seed)
    t = np.sort(rng.uniform(0, 10, n))
    s = OrderedSample(t, np.ones(n), np.zeros(n))
    j = int(rng.integers(0, n - 1))
    x0 = t[j] + frac * (t[j + 1] - t[j])
    if x0 in (t[j], t[j + 1]):
        return
    m = locate_interval(s, x0)
    assert s.time[m - 1] < x0 < s.time[m]
