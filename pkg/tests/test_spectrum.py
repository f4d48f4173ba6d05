import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rfrr.spectrum import Spectrum, SpectrumError, explicit_spectrum, power_law_spectrum, trace_resolvent


def test_power_law_values():
    s = power_law_spectrum(2.0, 0.5, trunc=100)
    assert len(s) == 100
    assert s.eigs[0] == 1.0
    assert s.eigs[9] == pytest.approx(0.01, rel=1e-15)
    # target squared decays as k^-(1 + 2 alpha r)
    assert s.target[1] ** 2 == pytest.approx(2.0**-3, rel=1e-14)


@pytest.mark.parametrize("alpha", [2.0, 3.0])
def test_power_law_ratio_exact_integer_alpha(alpha):
    s = power_law_spectrum(alpha, 0.3, trunc=1000)
    k = np.arange(1, 501)
    assert np.all(s.eigs[k - 1] / s.eigs[2 * k - 1] == 2.0**alpha)


@pytest.mark.parametrize("alpha", [1.3, 2.5, 4.7])
def test_power_law_ratio_fractional_alpha(alpha):
    # 2**alpha is irrational here, so equality holds to a few ulps only
    s = power_law_spectrum(alpha, 0.3, trunc=1000)
    k = np.arange(1, 501)
    ratio = s.eigs[k - 1] / s.eigs[2 * k - 1]
    assert np.max(np.abs(ratio / 2.0**alpha - 1)) <= 4 * np.finfo(float).eps


def test_trace_and_tail():
    s = explicit_spectrum([3.0, 2.0, 1.0, 0.0], [1, 1, 1, 1])
    assert s.trace == 6.0
    assert s.rank == 3
    assert s.tail_trace(2) == 3.0
    assert s.tail_trace(5) == 0.0
    assert s.eig(1) == 3.0 and s.eig(10) == 0.0


@pytest.mark.parametrize(
    "eigs,target,msg",
    [
        ([1.0, 2.0], [1, 1], "non-increasing"),
        ([1.0, -0.5], [1, 1], "negative"),
        ([1.0], [1, 1], "length"),
        ([], [], "empty"),
        ([np.nan], [1], "finite"),
    ],
)
def test_validation(eigs, target, msg):
    with pytest.raises(SpectrumError):
        explicit_spectrum(eigs, target)


def test_immutable():
    s = explicit_spectrum([1.0], [1.0])
    with pytest.raises(ValueError):
        s.eigs[0] = 2.0


def test_trace_resolvent_rank1():
    s = explicit_spectrum([1.0], [1.0])
    assert trace_resolvent(s, 1.0, 1, 1) == 0.5
    assert trace_resolvent(s, 1.0, 2, 2) == 0.25
    assert trace_resolvent(s, 1.0, 1, 2) == 0.25
    with pytest.raises(ValueError):
        trace_resolvent(s, 0.0)


def test_trace_resolvent_zero_tail():
    s = explicit_spectrum([1.0, 0.0, 0.0], [1, 1, 1])
    assert trace_resolvent(s, 1.0) == 0.5


def test_csv_roundtrip(tmp_path):
    s = power_law_spectrum(2.0, 0.5, trunc=50)
    path = tmp_path / "s.csv"
    s.to_csv(path)
    assert path.read_text().splitlines()[0] == "xi_sq,beta_star"
    t = Spectrum.from_csv(path)
    assert np.array_equal(s.eigs, t.eigs) and np.array_equal(s.target, t.target)


def test_csv_rejects_unsorted(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("xi_sq,beta_star\n0.1,1\n0.5,1\n")
    with pytest.raises(SpectrumError):
        Spectrum.from_csv(path)


def test_csv_requires_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0.5,1\n0.1,1\n")
    with pytest.raises(SpectrumError):
        Spectrum.from_csv(path)


spectra = st.lists(st.floats(1e-6, 1e3), min_size=1, max_size=40).map(
    lambda xs: explicit_spectrum(sorted(xs, reverse=True), np.ones(len(xs)))
)
nus = st.floats(1e-6, 1e6)


@settings(max_examples=100, deadline=None)
@given(spectra, nus, st.floats(1.01, 10.0))
def test_trace_resolvent_strictly_decreasing(s, nu, factor):
    for a in (1, 2):
        for b in (1, 2):
            assert trace_resolvent(s, nu * factor, a, b) < trace_resolvent(s, nu, a, b)


@settings(max_examples=100, deadline=None)
@given(spectra, nus)
def test_trace_resolvent_bounds(s, nu):
    t = trace_resolvent(s, nu, 1, 1)
    assert 0 <= t <= min(len(s), s.trace / nu) * (1 + 1e-12)
    assert trace_resolvent(s, nu, 2, 2) <= t


def test_trace_resolvent_matches_direct_sum():
    s = power_law_spectrum(1.5, 0.5, trunc=10_000)
    direct = math.fsum(e / (e + 1e-3) for e in s.eigs)
    assert trace_resolvent(s, 1e-3) == pytest.approx(direct, rel=1e-13)
