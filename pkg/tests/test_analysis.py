import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thintlm.analysis import (DivisionGuard, find_resonances, local_minima, relative_difference,
                              shielding_effectiveness, spectrum, write_spectrum_csv)

DT = 1e-11
N = 4096


def test_bin_centre_sinusoid():
    k = 100
    x = np.cos(2 * np.pi * k * np.arange(N) / N)
    s = spectrum(x, DT)
    assert len(s.f) == N // 2 + 1
    assert s.df == pytest.approx(1 / (N * DT))
    assert np.argmax(np.abs(s.X)) == k
    assert abs(s.X[k]) == pytest.approx(N / 2)
    others = np.delete(np.abs(s.X), k)
    assert others.max() < 1e-9 * N


def test_dc():
    s = spectrum(np.full(64, 3.0), DT)
    assert s.X[0] == pytest.approx(192.0)
    assert np.abs(s.X[1:]).max() < 1e-12


def test_two_tone_resonances():
    n = np.arange(N)
    x = np.cos(2 * np.pi * 80.3 * n / N) + 0.5 * np.cos(2 * np.pi * 211.7 * n / N)
    s = spectrum(x, DT, "hann")
    res = find_resonances(s)
    assert len(res) == 2
    assert res.frequencies == pytest.approx([80.3 * s.df, 211.7 * s.df], abs=0.5 * s.df)
    assert res[0].amplitude > res[1].amplitude
    assert len(find_resonances(s, n_peaks=1)) == 1
    assert len(find_resonances(s, f_min=100 * s.df)) == 1


@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=16, max_size=200))
@settings(max_examples=50, deadline=None)
def test_parseval(x):
    x = np.array(x)
    s = spectrum(x, DT)
    n = len(x)
    w = np.full(len(s.X), 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0
    assert np.sum(w * np.abs(s.X) ** 2) / n == pytest.approx(np.sum(x**2), rel=1e-9, abs=1e-6)


@given(st.floats(0.5, 2.0), st.floats(0.1, 3.0))
@settings(max_examples=30, deadline=None)
def test_scale_invariance(a, b):
    n = np.arange(N)
    x = np.exp(-n / 800) * np.sin(2 * np.pi * 150.4 * n / N)
    f1 = find_resonances(spectrum(x, DT)).frequencies
    f2 = find_resonances(spectrum(b * x, DT * a)).frequencies
    assert f2 == pytest.approx(f1 / a, rel=1e-9)


def test_damped_resonator_peak():
    # decaying sinusoid: Lorentzian line centred at f0
    f0 = 1.0e9
    dt = 1e-11
    n = np.arange(1 << 15)
    x = np.exp(-n * dt / 50e-9) * np.sin(2 * np.pi * f0 * n * dt)
    s = spectrum(x, dt)
    res = find_resonances(s, n_peaks=1)
    assert abs(res[0].f - f0) < s.df / 2


def test_flat_spectrum_has_no_resonances():
    x = np.zeros(256)
    x[0] = 1.0
    assert find_resonances(spectrum(x, DT)) == []
    assert find_resonances(spectrum(np.zeros(256), DT)) == []
    with pytest.raises(ValueError):
        find_resonances(spectrum(x, DT), n_peaks=0)


def test_spectrum_validation():
    with pytest.raises(ValueError):
        spectrum(np.ones(8), DT)
    with pytest.raises(ValueError):
        spectrum(np.ones(32), DT, "kaiser")


def _pair(x, y, meta=None):
    return spectrum(x, DT, meta=meta), spectrum(y, DT, meta=meta)


def test_se_values():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(256)
    a, b = _pair(x, x)
    assert np.allclose(shielding_effectiveness(a, b).se_db, 0.0)
    a, b = _pair(x, 0.1 * x)
    se = shielding_effectiveness(a, b)
    assert np.allclose(se.se_db, 20.0)
    assert se.at(se.f[5]) == pytest.approx(20.0)
    back = shielding_effectiveness(b, a)
    assert np.allclose(back.se_db, -se.se_db)
    f, v = se.band(se.f[3], se.f[10])
    assert len(f) == 8 and np.allclose(v, 20.0)


def test_se_clamps_and_rejects_mismatch():
    x = np.zeros(64)
    x[0] = 1.0
    a, b = _pair(x, np.zeros(64))
    with pytest.warns(DivisionGuard):
        se = shielding_effectiveness(a, b)
    assert se.clamped.all() and np.isfinite(se.se_db).all()
    assert se.se_db == pytest.approx(np.full(33, 600.0))
    with pytest.raises(ValueError):
        shielding_effectiveness(spectrum(x, DT, meta={"src": 1}), spectrum(x, DT, meta={"src": 2}))
    with pytest.raises(ValueError):
        shielding_effectiveness(spectrum(x, DT), spectrum(np.ones(32), DT))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        shielding_effectiveness(a, a)


def test_relative_difference_examples():
    assert relative_difference(0.883e9, 0.889e9) == pytest.approx(0.67, abs=0.005)
    d = relative_difference(2.091e9, 2.124e9)
    assert 1.55 <= d <= 1.56
    assert relative_difference([1, 3], [2, 2]) == pytest.approx([50.0, 50.0])
    with pytest.raises(ValueError):
        relative_difference(1.0, 0.0)


def test_local_minima():
    f = np.linspace(0, 10, 101)
    y = np.cos(f)
    m = local_minima(f, y)
    assert m == pytest.approx([np.pi, 3 * np.pi], abs=0.06)
    assert local_minima(f, y, f_lo=5) == pytest.approx([3 * np.pi], abs=0.06)


def test_spectrum_csv(tmp_path):
    x = np.sin(np.arange(64))
    s = spectrum(x, DT)
    p = tmp_path / "s.csv"
    write_spectrum_csv(p, s)
    d = np.loadtxt(p, delimiter=",", skiprows=1)
    assert d.shape == (33, 4)
    assert np.array_equal(d[:, 1] + 1j * d[:, 2], s.X)
    write_spectrum_csv(p, s, f_max=s.f[9])
    assert np.loadtxt(p, delimiter=",", skiprows=1).shape == (10, 4)
