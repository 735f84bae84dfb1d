import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raa_isac.array_model import ISOTROPIC_ELEMENT, RaaConfig, UlaConfig, raa_response_vector
from raa_isac.comms import channel_grid, equivalent_channel, expected_rate, instantaneous_rate
from raa_isac.signal_model import OfdmConfig, PathParams, SelectionMatrix, make_swarm_scenario

OFDM = OfdmConfig(n_sc=16, m_sym=8, n_rf=4)
RAA = RaaConfig.design(16)
SEL = SelectionMatrix((10, 11, 12, 13))


def test_channel_origin_cell():
    p = PathParams(0.5 + 0.5j, 0.1, 2e-7, 700.0)
    h = equivalent_channel([p], RAA, SEL, OFDM, 0, 0)
    assert np.allclose(h, p.cp_gain(OFDM.t_cp) * raa_response_vector(0.1, RAA, list(SEL.indices)))


def test_single_path_channel_norm_constant():
    h = channel_grid([PathParams(1.0, 0.1, 2e-7, 700.0)], RAA, SEL, OFDM)
    norms = np.linalg.norm(h, axis=0)
    assert np.allclose(norms, norms[0, 0])


def test_channel_is_linear_in_paths():
    a, b = PathParams(1.0, 0.1, 2e-7, 700.0), PathParams(0.3j, -0.2, 4e-7, -100.0)
    both = channel_grid([a, b], RAA, SEL, OFDM)
    assert np.allclose(both, channel_grid([a], RAA, SEL, OFDM) + channel_grid([b], RAA, SEL, OFDM))


def test_zero_gain_rate_is_zero():
    _, rate = instantaneous_rate([PathParams(0.0, 0.1, 2e-7, 0.0)], RAA, SEL, OFDM)
    assert rate == 0.0


@settings(max_examples=20)
@given(st.floats(0.01, 3.0), st.floats(-1.2, 1.2))
def test_single_path_rate_scalar_oracle(mag, aoa):
    p = PathParams(mag, aoa, 2e-7, 300.0)
    _, rate = instantaneous_rate([p], RAA, SEL, OFDM)
    gain = mag ** 2 * sum(abs(complex(v)) ** 2 for v in raa_response_vector(aoa, RAA, list(SEL.indices)))
    snr = gain * OFDM.tx_power / (RAA.M * OFDM.noise_var / OFDM.n_sc)
    ref = OFDM.n_sc * OFDM.m_sym * math.log2(1 + snr) / OFDM.m_sym / (OFDM.n_sc * OFDM.delta_f * OFDM.T_s)
    assert rate == pytest.approx(ref, rel=1e-12)


def test_expected_rate_reproducible_and_stderr():
    sampler = lambda s: make_swarm_scenario(0.2, 3, 0.01, 2e-7, 1e-16, 0.0, 100.0, seed=s)
    a = expected_rate(sampler, RAA, OFDM, 10, seed=4)
    b = expected_rate(sampler, RAA, OFDM, 10, seed=4)
    assert a.rate == b.rate
    assert a.stderr == pytest.approx(np.std(a.trial_rates, ddof=1) / np.sqrt(10))
    assert a.per_subcarrier_snr.shape == (16, 8)


def test_raa_beats_isotropic_ula():
    sampler = lambda s: make_swarm_scenario(0.6, 5, np.deg2rad(0.5), 3e-7, 1e-16, 300.0, 6400.0, seed=s)
    ofdm = OfdmConfig(n_sc=16, m_sym=8, n_rf=8)
    raa = expected_rate(sampler, RaaConfig.design(128), ofdm, 20, seed=1)
    ula = expected_rate(sampler, UlaConfig(128, ISOTROPIC_ELEMENT), ofdm, 20, seed=1)
    assert raa.rate - ula.rate > 2 * np.hypot(raa.stderr, ula.stderr)
