import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bosonic_qubits.errors import InvalidParameterError
from bosonic_qubits.spectra import (
    SpectralProfile,
    coherence_time,
    overlap,
    spectral_amplitude,
    temporal_amplitude,
)

from oracles import overlap_by_quad


def gl(lo, hi, nodes=200, panels=8):
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(lo, hi, panels + 1)
    ts, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        ts.append(0.5 * (b - a) * x + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * w)
    return np.concatenate(ts), np.concatenate(ws)


def test_peak_value_is_real_normalization_constant():
    p = SpectralProfile(20.0, 2.0, 0.0)
    assert spectral_amplitude(p, 20.0) == pytest.approx((1 / (math.pi * 4.0)) ** 0.25, abs=1e-15)
    assert spectral_amplitude(p, 20.0).imag == 0.0


@pytest.mark.parametrize("sign", [1, -1])
def test_one_sigma_point(sign):
    p = SpectralProfile(20.0, 2.0, 0.0)
    peak = spectral_amplitude(p, 20.0)
    assert spectral_amplitude(p, 20.0 + sign * 2.0) == pytest.approx(peak * math.exp(-0.5), rel=1e-14)


@pytest.mark.parametrize("w0,dw,ts", [(20.0, 1.0, 0.0), (50.0, 3.0, 1.5), (12.0, 0.7, -2.0)])
def test_parseval_both_domains(w0, dw, ts):
    p = SpectralProfile(w0, dw, ts)
    w, wt = gl(w0 - 8 * dw, w0 + 8 * dw)
    assert np.sum(wt * np.abs(spectral_amplitude(p, w)) ** 2) == pytest.approx(1.0, abs=1e-8)
    t, tw = gl(ts - 8 / dw, ts + 8 / dw)
    assert np.sum(tw * np.abs(temporal_amplitude(p, t)) ** 2) == pytest.approx(1.0, abs=1e-8)


def test_temporal_peak_and_symmetry():
    p = SpectralProfile(30.0, 2.5, 0.7)
    assert temporal_amplitude(p, 0.7) == pytest.approx((2.5 ** 2 / math.pi) ** 0.25, abs=1e-15)
    for u in (0.1, 0.5, 2.0):
        assert abs(temporal_amplitude(p, 0.7 + u)) == pytest.approx(abs(temporal_amplitude(p, 0.7 - u)), rel=1e-14)


def test_fourier_consistency_random_profiles(rng):
    # (2 pi)^(-1/2) int xi(w) e^{-i w t} dw over w0 +- 8 dw, 20 random draws
    for _ in range(20):
        dw = rng.uniform(0.3, 3.0)
        w0 = dw * rng.uniform(10, 40)
        ts = rng.uniform(-3, 3)
        p = SpectralProfile(w0, dw, ts)
        w, wt = gl(w0 - 8 * dw, w0 + 8 * dw, nodes=64, panels=40)
        for t in ts + rng.uniform(-4, 4, size=5) / dw:
            numeric = np.sum(wt * spectral_amplitude(p, w) * np.exp(-1j * w * t)) / math.sqrt(2 * math.pi)
            assert abs(numeric - temporal_amplitude(p, t)) < 1e-8


@pytest.mark.parametrize("tau", [0.0, 0.3, 1.0, 2.5])
def test_delayed_overlap_closed_form_and_quadrature(tau):
    w0, dw = 20.0, 1.3
    a, b = SpectralProfile(w0, dw, 0.0), SpectralProfile(w0, dw, tau)
    expected = math.exp(-(dw * tau) ** 2 / 4) * complex(math.cos(w0 * tau), math.sin(w0 * tau))
    assert abs(overlap(a, b) - expected) < 1e-13
    numeric = overlap_by_quad((w0, dw, 0.0), (w0, dw, tau), -12, tau + 12)
    assert abs(numeric - expected) < 1e-9


def test_coherence_time():
    assert coherence_time(SpectralProfile(20, 1)) == 1
    assert coherence_time(SpectralProfile(20, 0.5)) == 2
    assert coherence_time(SpectralProfile(20, 2)) == 0.5


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(omega0=20, delta_omega=0),
        dict(omega0=20, delta_omega=-1),
        dict(omega0=0, delta_omega=1e-3),
        dict(omega0=5, delta_omega=1),
        dict(omega0=float("nan"), delta_omega=1),
    ],
)
def test_invalid_profiles_rejected(kwargs):
    with pytest.raises(InvalidParameterError):
        SpectralProfile(**kwargs)


def test_narrowband_ratio_is_configurable():
    with pytest.raises(InvalidParameterError):
        SpectralProfile(5.0, 1.0)
    assert SpectralProfile(5.0, 1.0, narrowband_ratio=4.0).omega0 == 5.0


profiles = st.builds(
    lambda dw, ratio, ts: SpectralProfile(dw * ratio, dw, ts),
    st.floats(0.2, 3.0),
    st.floats(10.5, 30.0),
    st.floats(-3.0, 3.0),
)


@settings(max_examples=100, deadline=None)
@given(profiles, profiles)
def test_overlap_bounded_by_one(p, q):
    assert abs(overlap(p, q)) <= 1 + 1e-12
    assert abs(overlap(p, p)) == pytest.approx(1.0, abs=1e-12)
    separation = abs(p.delta_omega - q.delta_omega) + abs(p.t_offset - q.t_offset) + abs(p.omega0 - q.omega0)
    if separation > 1e-3:
        assert abs(overlap(p, q)) < 1.0
