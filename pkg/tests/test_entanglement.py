import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvteleport.entanglement import (SLOPE_ASYMPTOTE, SqueezeParam, auto_truncation,
                                     entropy_closed_form, entropy_numeric, entropy_sweep,
                                     squeezed_state, truncation_tail)
from cvteleport.errors import TruncationWarning, ValidationError
from cvteleport.fock import TruncationConfig, partial_trace


def test_squeeze_param():
    p = SqueezeParam(0.69)
    assert p.lam == pytest.approx(math.tanh(0.69))
    assert p.variance_factor == pytest.approx(math.exp(-1.38))
    for bad in (-0.1, math.nan):
        with pytest.raises(ValidationError):
            SqueezeParam(bad)


def test_headline_value():
    assert entropy_closed_form(0.69) == pytest.approx(1.4642473231911424, abs=1e-13)
    assert abs(entropy_closed_form(0.69) - 1.46) <= 0.01


@given(st.floats(0, 2.5))
@settings(max_examples=40, deadline=None)
def test_numeric_matches_closed_form(r):
    t = TruncationConfig(auto_truncation(r))
    assert entropy_numeric(r, t) == pytest.approx(entropy_closed_form(r), abs=1e-9)


def test_entropy_zero_and_monotone():
    assert entropy_closed_form(0) == 0.0
    assert entropy_numeric(0, TruncationConfig(5)) == 0.0
    rs = np.linspace(0, 4, 200)
    assert np.all(np.diff([entropy_closed_form(r) for r in rs]) > 0)


def test_large_r_asymptote():
    # E(r) ~ 2r/ln2 + const; slope error decays like exp(-2r)
    d = entropy_closed_form(8.0) - entropy_closed_form(7.0)
    assert d == pytest.approx(SLOPE_ASYMPTOTE, rel=1e-6)


def test_squeezed_state_schmidt_form():
    t = TruncationConfig(30)
    s = squeezed_state(0.5, t)
    assert np.count_nonzero(s.amps - np.diag(np.diag(s.amps))) == 0
    lam = math.tanh(0.5)
    np.testing.assert_allclose(np.diag(s.amps)[1:] / np.diag(s.amps)[:-1], lam)


def test_squeezed_state_infinite_is_maximally_entangled():
    t = TruncationConfig(5)
    s = squeezed_state(math.inf, t)
    np.testing.assert_allclose(s.amps, np.eye(6) / math.sqrt(6))
    rho = partial_trace(s)
    assert entropy_numeric(math.inf, t) == pytest.approx(math.log2(6))
    assert np.trace(rho.mat).real == pytest.approx(1)


def test_truncation_warning_and_tail():
    with pytest.warns(TruncationWarning):
        squeezed_state(1.0, TruncationConfig(5))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        squeezed_state(0.69, TruncationConfig(auto_truncation(0.69)))


@pytest.mark.parametrize("r, expect", [(0.0, 0), (0.69, 27), (2.0, 413)])
def test_auto_truncation(r, expect):
    n = auto_truncation(r)
    assert n == expect
    lam2 = math.tanh(r) ** 2
    crit = lambda k: lam2 ** (k + 1) / (1 - lam2)
    if n:
        assert crit(n) < 1e-12 <= crit(n - 1)
        assert truncation_tail(r, n) <= crit(n)   # so no truncation warning


def test_auto_truncation_rejects_infinite():
    with pytest.raises(ValidationError):
        auto_truncation(math.inf)


def test_sweep_shape_and_slope():
    s = entropy_sweep(0, 2, 81)
    assert len(s.r) == 81 and s.r[0] == 0 and s.r[-1] == 2
    assert s.closed[0] == 0
    assert s.slope(1, 2) == pytest.approx(2.87829, abs=1e-5)
    assert abs(s.slope(1, 2) / SLOPE_ASYMPTOTE - 1) < 0.02
    assert s.N == 413
    r, c, n = s.at(0.69)
    assert r == pytest.approx(0.7) and c == pytest.approx(n, abs=1e-9)
    assert s.end_slope() > s.slope(0, 1)


def test_sweep_csv():
    lines = entropy_sweep(0, 1, 5).to_csv().splitlines()
    assert lines[0] == "r,E_closed_bits,E_numeric_bits"
    assert len(lines) == 6
    assert all(float(x) == float(x) for x in lines[3].split(","))


def test_sweep_fixed_truncation_warns():
    with pytest.warns(TruncationWarning):
        s = entropy_sweep(0, 2, 5, TruncationConfig(10))
    assert s.N == 10
    assert s.numeric[-1] < s.closed[-1]   # truncation underestimates


@pytest.mark.parametrize("args", [(1, 0, 5), (-1, 1, 5), (0, 1, 1)])
def test_sweep_validation(args):
    with pytest.raises(ValidationError):
        entropy_sweep(*args)


def test_slope_needs_points():
    with pytest.raises(ValidationError):
        entropy_sweep(0, 1, 3).slope(2, 3)
