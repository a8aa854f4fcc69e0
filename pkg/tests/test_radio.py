import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fogfl.radio import (DelayBreakdown, RadioConfig, UEProfile, compute_delay,
                         energy, path_loss_gain, rate_dl, rate_ul, round_delay,
                         snr_ul)

from conftest import mnist_radio


def test_path_loss_at_1km():
    # at d = 1 km the log term vanishes: gain = 10^(-103.8/10)
    assert path_loss_gain(1.0) == pytest.approx(10 ** (-10.38), rel=1e-12)


def test_path_loss_monotone_decreasing():
    d = np.linspace(0.01, 2.0, 100)
    g = path_loss_gain(d)
    assert np.all(np.diff(g) < 0)
    assert np.all((g > 0) & (g < 1))


def test_path_loss_rejects_nonpositive_distance():
    with pytest.raises(ValueError):
        path_loss_gain(0.0)


def test_snr_linear_in_power():
    s1 = snr_ul(0.01, 1e-11, 8, 10e6, 4e-21)
    s2 = snr_ul(0.02, 1e-11, 8, 10e6, 4e-21)
    assert s2 == pytest.approx(2 * s1, rel=1e-12)


def test_rate_ul_matches_shannon_form():
    radio = mnist_radio()
    p, phi, beta = 0.05, 1e-11, 0.25
    snr = p * radio.K * phi / (radio.W_ul * radio.N0)
    expect = beta * radio.W_ul * math.log2(1 + snr)
    assert rate_ul(beta, p, phi, radio) == pytest.approx(expect, rel=1e-12)


def test_rate_ul_rejects_zero_bandwidth():
    with pytest.raises(ValueError):
        rate_ul(0.0, 0.05, 1e-11, mnist_radio())


def test_rate_dl_limited_by_weakest_user():
    radio = mnist_radio()
    phis = np.array([1e-10, 1e-12, 5e-11])
    snr_min = radio.P_bs_max * radio.K * phis.min() / (radio.W_dl * radio.N0)
    expect = radio.W_dl_cell * math.log2(1 + snr_min)
    assert rate_dl(phis, radio) == pytest.approx(expect, rel=1e-12)


def test_compute_delay_formula():
    assert compute_delay(2e9, 15.0, 125440.0, 20) == pytest.approx(
        20 * 15.0 * 125440.0 / 2e9, rel=1e-12)


def test_energy_formula():
    ue = UEProfile(fog_id=0, p_max=0.1, c=15.0, f_min=1e6, f_max=2e9,
                   theta_half=1e-28, e_max=0.1, position=(0.1, 0.1))
    e = energy(0.05, 2.0, 1e9, ue, 20, 125440.0)
    expect = 0.05 * 2.0 + 20 * 1e-28 * 15.0 * 125440.0 * 1e18
    assert e == pytest.approx(expect, rel=1e-12)


def test_round_delay_is_slowest_total():
    parts = [DelayBreakdown(0.1, 0.2, 0.3), DelayBreakdown(0.5, 0.1, 0.05)]
    assert round_delay(parts) == pytest.approx(0.65)
    with pytest.raises(ValueError):
        round_delay([])


def test_delay_breakdown_rejects_negative():
    with pytest.raises(ValueError):
        DelayBreakdown(-0.1, 0.2, 0.3)


def test_radio_config_requires_uplink_overhead():
    with pytest.raises(ValueError):
        RadioConfig(W_dl=1e6, W_ul=1e6, N0=4e-21, snr_min=1.26, I=1, K=8,
                    P_bs_max=10.0, S_dl=1000.0, S_ul=1000.0, S_B=100.0)


@given(p1=st.floats(1e-4, 0.2), p2=st.floats(1e-4, 0.2),
       beta=st.floats(0.01, 1.0))
def test_rate_ul_monotone_in_power(p1, p2, beta):
    radio = mnist_radio()
    lo, hi = sorted((p1, p2))
    assert rate_ul(beta, lo, 1e-11, radio) <= rate_ul(beta, hi, 1e-11, radio)


@given(beta1=st.floats(0.01, 1.0), beta2=st.floats(0.01, 1.0))
def test_rate_ul_monotone_in_bandwidth(beta1, beta2):
    radio = mnist_radio()
    lo, hi = sorted((beta1, beta2))
    assert rate_ul(lo, 0.05, 1e-11, radio) <= rate_ul(hi, 0.05, 1e-11, radio)
