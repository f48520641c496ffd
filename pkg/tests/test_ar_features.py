import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import signal as sps
from scipy.linalg import toeplitz

from qkad.ar_features import (
    Signal,
    apply_scaler,
    autocorrelation,
    extract_features,
    fit_scaler,
    levinson_durbin,
    read_features_csv,
    read_signal,
    read_wav,
    segment,
    write_features_csv,
    write_wav,
)
from qkad.errors import ConditioningError, DegenerateSignalError

FS = 16000


def ar_signal(phi, n, seed, sigma=1.0):
    """Draw y_t = sum_i phi_i y_{t-i} + e_t by direct IIR filtering of white noise."""
    rng = np.random.default_rng(seed)
    e = rng.normal(0, sigma, n + 1000)
    y = sps.lfilter([1.0], np.r_[1.0, -np.asarray(phi)], e)
    return Signal(FS, y[1000:])


def random_autocorrelation(rng, p):
    x = rng.normal(size=int(rng.integers(50, 400)))
    x = sps.lfilter([1.0], [1.0, rng.uniform(-0.9, 0.9)], x)
    return autocorrelation(Signal(FS, x), p)


# --- segmentation -----------------------------------------------------------

def test_segment_counts():
    five_minutes = Signal(FS, np.zeros(300 * FS))
    segs = segment(five_minutes, 10)
    assert len(segs) == 30
    assert all(s.samples.size == 160000 for s in segs)
    assert len(segment(Signal(FS, np.zeros(10 * FS)), 10)) == 1
    assert len(segment(Signal(FS, np.zeros(int(19.9 * FS))), 10)) == 1


def test_segment_keeps_order():
    sig = Signal(10, np.arange(35.0))
    segs = segment(sig, 1.0)
    assert [s.samples[0] for s in segs] == [0, 10, 20]


def test_segment_too_short():
    with pytest.raises(ValueError):
        segment(Signal(FS, np.zeros(FS)), 10)


# --- autocorrelation ------------------------------------------------------------

def test_autocorrelation_constant_signal():
    np.testing.assert_array_equal(autocorrelation(Signal(FS, np.full(100, 3.0)), 4), 0.0)


def test_autocorrelation_alternating():
    r = autocorrelation(Signal(FS, [1.0, -1.0, 1.0, -1.0]), 1)
    np.testing.assert_allclose(r, [1.0, -0.75])


def test_autocorrelation_white_noise():
    x = np.random.default_rng(5).normal(size=160000)
    r = autocorrelation(Signal(FS, x), 3)
    assert abs(r[1] / r[0]) < 0.02
    assert np.all(r[0] >= np.abs(r))


def test_autocorrelation_lag_bounds():
    with pytest.raises(ValueError):
        autocorrelation(Signal(FS, np.ones(5)), 5)


# --- Levinson-Durbin ------------------------------------------------------------

def test_levinson_order_one():
    fit = levinson_durbin([1.0, 0.5], 1)
    np.testing.assert_allclose(fit.coefficients, [0.5])
    assert fit.noise_variance == pytest.approx(0.75)


def test_levinson_matches_direct_toeplitz_solve(rng):
    for _ in range(100):
        p = int(rng.integers(1, 11))
        r = random_autocorrelation(rng, p)
        fit = levinson_durbin(r, p)
        direct = np.linalg.solve(toeplitz(r[:p]), r[1:p + 1])
        np.testing.assert_allclose(fit.coefficients, direct, atol=1e-8, rtol=0)
        assert fit.noise_variance == pytest.approx(r[0] - direct @ r[1:p + 1], abs=1e-10)
        assert np.all(np.abs(fit.reflection_coefficients) < 1)


def test_error_variance_non_increasing(rng):
    r = random_autocorrelation(rng, 10)
    variances = [levinson_durbin(r, p).noise_variance for p in range(1, 11)]
    assert all(b <= a + 1e-15 for a, b in zip(variances, variances[1:]))
    assert np.all(np.diff(levinson_durbin(r, 10).error_variances) <= 1e-15)


def test_recovers_ar2():
    fit = levinson_durbin(autocorrelation(ar_signal([0.5, -0.3], 160000, seed=11), 2), 2)
    np.testing.assert_allclose(fit.coefficients, [0.5, -0.3], atol=0.05)
    assert fit.noise_variance == pytest.approx(1.0, rel=0.05)


def test_recovery_improves_with_length():
    truth = np.array([0.5, -0.3])
    errs = []
    for n in (2000, 160000):
        trials = [np.abs(extract_features(ar_signal(truth, n, seed=s), 2) - truth).max() for s in range(8)]
        errs.append(np.mean(trials))
    assert errs[1] < errs[0]


def test_levinson_errors():
    with pytest.raises(DegenerateSignalError):
        levinson_durbin([0.0, 0.0], 1)
    with pytest.raises(ConditioningError):
        levinson_durbin([1.0, 1.2], 1)
    with pytest.raises(ValueError):
        levinson_durbin([1.0, 0.1], 2)


def test_constant_segment_is_degenerate():
    with pytest.raises(DegenerateSignalError):
        extract_features(Signal(FS, np.ones(1000)), 2)


# --- features -------------------------------------------------------------------

def test_extract_features_ar2_and_white():
    np.testing.assert_allclose(extract_features(ar_signal([0.5, -0.3], 160000, 3), 2), [0.5, -0.3], atol=0.05)
    white = Signal(FS, np.random.default_rng(8).normal(size=160000))
    np.testing.assert_allclose(extract_features(white, 2), [0, 0], atol=0.02)
    f10 = extract_features(white, 10)
    assert f10.shape == (10,) and np.all(np.isfinite(f10))


@pytest.mark.parametrize("d", [1, 11, 2.5])
def test_extract_features_range(d):
    with pytest.raises(ValueError):
        extract_features(Signal(FS, np.random.default_rng(0).normal(size=100)), d)


# --- scaler -------------------------------------------------------------------------

def test_scaler_affine():
    sc = fit_scaler([[0.0], [1.0], [2.0]])
    np.testing.assert_allclose(apply_scaler(sc, [[0.0], [1.0], [2.0]]).ravel(), [0, math.pi / 2, math.pi])


def test_scaler_degenerate_column():
    sc = fit_scaler([[5.0, 1.0], [5.0, 2.0]])
    out = apply_scaler(sc, [[5.0, 1.0], [7.0, 2.0]])
    np.testing.assert_allclose(out[:, 0], math.pi / 2)


def test_scaler_clipping():
    sc = fit_scaler([[0.0], [1.0]])
    assert apply_scaler(sc, [-1.0])[0] == pytest.approx(-math.pi / 2)
    assert apply_scaler(sc, [-5.0])[0] == pytest.approx(-math.pi / 2)
    assert apply_scaler(sc, [9.0])[0] == pytest.approx(3 * math.pi / 2)


def test_scaler_extremes_exact(rng):
    X = rng.normal(size=(20, 4))
    out = apply_scaler(fit_scaler(X), X)
    assert np.all(out.min(axis=0) == 0.0)
    assert np.all(out.max(axis=0) == math.pi)


def test_scaler_validation():
    with pytest.raises(ValueError):
        fit_scaler([])
    with pytest.raises(ValueError):
        apply_scaler(fit_scaler([[0.0, 1.0]]), [1.0])


# --- file formats ---------------------------------------------------------------

def test_wav_round_trip(tmp_path):
    x = np.round(np.random.default_rng(1).uniform(-0.9, 0.9, 4000) * 32768) / 32768
    write_wav(tmp_path / "a.wav", Signal(FS, x))
    back = read_wav(tmp_path / "a.wav")
    assert back.sample_rate_hz == FS
    np.testing.assert_array_equal(back.samples, x)


def test_csv_signal(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("# header\n0.5\n-0.25\n\n1.0\n")
    sig = read_signal(path, 8000)
    assert sig.sample_rate_hz == 8000
    np.testing.assert_array_equal(sig.samples, [0.5, -0.25, 1.0])


def test_features_csv_round_trip(tmp_path):
    F = np.random.default_rng(2).normal(size=(3, 4))
    path = tmp_path / "f.csv"
    write_features_csv(path, F, comment="prov")
    lines = path.read_text().splitlines()
    assert lines[0] == "# prov"
    assert lines[1] == "phi_1,phi_2,phi_3,phi_4"
    np.testing.assert_array_equal(read_features_csv(path), F)


def test_signal_validation():
    with pytest.raises(ValueError):
        Signal(FS, [])
    with pytest.raises(ValueError):
        Signal(FS, [0.0, np.nan])
    with pytest.raises(ValueError):
        Signal(0, [1.0])


finite = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(arrays(float, st.tuples(st.integers(1, 12), st.integers(2, 5)), elements=finite),
       arrays(float, 5, elements=st.floats(-1e4, 1e4)))
def test_scaler_output_always_in_clip_window(train, probe):
    sc = fit_scaler(train)
    out = apply_scaler(sc, probe[: train.shape[1]])
    assert np.all(out >= -math.pi / 2) and np.all(out <= 3 * math.pi / 2)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-0.95, 0.95), min_size=1, max_size=10))
def test_levinson_inverts_reflection_coefficients(ks):
    """Autocorrelations built from chosen reflection coefficients give them back."""
    r = [1.0]
    a = np.zeros(0)
    err = 1.0
    for k in ks:
        r.append(float(a @ r[1:][::-1]) + k * err if a.size else k * err)
        a = np.r_[a - k * a[::-1], k]
        err *= 1 - k * k
    fit = levinson_durbin(r, len(ks))
    np.testing.assert_allclose(fit.reflection_coefficients, ks, atol=1e-9)
