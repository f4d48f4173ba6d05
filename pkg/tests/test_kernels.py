import importlib
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rfrr import _kernels_py as py
from rfrr import kernels

compiled = pytest.importorskip("rfrr._kernels")


def test_backend_selected():
    assert kernels.BACKEND == "compiled"


def test_env_forces_python():
    code = "import rfrr.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, RFRR_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_status_codes_agree():
    assert (compiled.CONVERGED, compiled.STALLED, compiled.MAX_ITER) == (py.CONVERGED, py.STALLED, py.MAX_ITER)


spectra = st.tuples(st.floats(1.1, 4), st.integers(1, 3000), st.floats(-8, 3))


@settings(max_examples=80, deadline=None)
@given(spectra)
def test_sums_agree(args):
    alpha, trunc, lognu = args
    k = np.arange(1, trunc + 1, dtype=float)
    eigs, target = k**-alpha, k ** (-(1 + alpha) / 2)
    nu = 10.0**lognu
    for a in (1, 2):
        for b in (1, 2):
            assert compiled.trace_power(eigs, nu, a, b) == pytest.approx(py.trace_power(eigs, nu, a, b), rel=1e-12)
    c = compiled.resolvent_sums(eigs, target, nu)
    p = py.resolvent_sums(eigs, target, nu)
    assert np.allclose(c, p, rtol=1e-12, atol=0)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 10**5), st.integers(1, 10**5), st.floats(-8, 4), st.floats(-8, 4))
def test_nu1_agrees(n, p, loglam, lognu):
    a = compiled.nu1_from_nu2(float(n), float(p), 10.0**loglam, 10.0**lognu)
    b = py.nu1_from_nu2(float(n), float(p), 10.0**loglam, 10.0**lognu)
    assert a == pytest.approx(b, rel=1e-14)


@pytest.mark.parametrize("n,p,lam", [(500, 300, 0.1), (100, 2000, 1e-4), (3000, 50, 1e-6), (20, 20, 1e2)])
def test_iteration_agrees(n, p, lam):
    k = np.arange(1, 5001, dtype=float)
    eigs = k**-2.0
    nu2_0 = lam / n + eigs.sum() / p
    c = compiled.iterate_fixed_point(eigs, float(n), float(p), lam, nu2_0, 1e-10, 100_000, 1.0, 100)
    q = py.iterate_fixed_point(eigs, float(n), float(p), lam, nu2_0, 1e-10, 100_000, 1.0, 100)
    assert c[3] == q[3]
    assert abs(c[2] - q[2]) <= 2
    assert c[1] == pytest.approx(q[1], rel=1e-8)


@pytest.mark.parametrize("s,delta,gamma", [(0, 1, 1), (1, 1, 1), (0, 2, 2), (1, 0.5, 1)])
def test_t_sum_agrees(s, delta, gamma):
    a = compiled.t_sum(s, delta, gamma, 1e-4, 2.0, 10**5)
    b = py.t_sum(s, delta, gamma, 1e-4, 2.0, 10**5)
    assert a == pytest.approx(b, rel=1e-12)


def test_compensated_sum_accuracy():
    # many tiny terms after a large one: fsum is the reference
    eigs = np.concatenate([[1.0], np.full(10**5, 1e-12)])
    ref = math.fsum(e / (e + 1e-3) for e in eigs)
    assert compiled.trace_power(eigs, 1e-3, 1, 1) == pytest.approx(ref, rel=1e-15)
