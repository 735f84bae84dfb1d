import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raa_isac.array_model import RaaConfig, UlaConfig, raa_response_vector
from raa_isac.signal_model import (OfdmConfig, PathParams, SelectionMatrix, SignalTensor, SymbolGrid,
                                   data_removal, make_swarm_scenario, probe_outputs, select_rays_energy,
                                   sweep_count, synthesize_noise, synthesize_tensor,
                                   synthesize_time_domain_oracle)

SMALL = OfdmConfig(n_sc=16, m_sym=4, n_rf=3)


def _path(aoa=0.2, delay=1e-7, doppler=500.0, gain=0.8 - 0.3j):
    return PathParams(gain, aoa, delay, doppler, True)


def test_ofdm_derived_quantities():
    o = OfdmConfig()
    assert o.T_s == pytest.approx(9e-6)
    assert o.bandwidth == pytest.approx(61.44e6)
    assert o.snr_db == pytest.approx(20.0)
    assert o.tensor_noise_var(128) == pytest.approx(128 * 0.01 / 512)
    assert o.with_snr_db(10).noise_var == pytest.approx(0.1)


def test_swarm_angles():
    paths = make_swarm_scenario(np.deg2rad(60), 5, np.deg2rad(0.5), 1e-6 / 3, 4e-16, 300, 6400, seed=1)
    assert np.allclose(np.rad2deg([p.aoa for p in paths]), [59, 59.5, 60, 60.5, 61])
    assert paths[0].is_los and not any(p.is_los for p in paths[1:])
    assert all(abs(abs(p.gain) - 1) < 1e-12 for p in paths)
    assert all(0 < p.delay < OfdmConfig().t_cp for p in paths)


def test_swarm_zero_variance():
    (p,) = make_swarm_scenario(0.0, 1, 0.01, 2e-7, 0.0, 123.0, 0.0, seed=3)
    assert (p.aoa, p.delay, p.doppler) == (0.0, 2e-7, 123.0)


def test_swarm_doppler_variance():
    dopplers = []
    for s in range(2000):
        dopplers += [p.doppler for p in make_swarm_scenario(0.0, 5, 0.01, 1e-6 / 3, 4e-16, 300, 6400, seed=s)]
    assert len(dopplers) >= 1e4
    assert np.var(dopplers) == pytest.approx(6400, rel=0.05)


def test_swarm_rejects_out_of_range():
    with pytest.raises(ValueError):
        make_swarm_scenario(np.deg2rad(89.5), 5, np.deg2rad(0.5), 1e-7, 0, 0, 0)


def test_tensor_single_path_origin_cell():
    raa = RaaConfig.design(8)
    sel = SelectionMatrix((5, 6, 7))
    grid = SymbolGrid.qpsk(SMALL.n_sc, SMALL.m_sym, 1.0, 0)
    p = _path()
    y = synthesize_tensor([p], raa, SMALL, sel, grid).samples
    ref = p.cp_gain(SMALL.t_cp) * raa_response_vector(p.aoa, raa, [5, 6, 7]) * grid.data[0, 0]
    assert np.allclose(y[:, 0, 0], ref, rtol=1e-13)


def test_tensor_phase_progression():
    raa = RaaConfig.design(8)
    sel = SelectionMatrix((6,))
    grid = SymbolGrid.constant(SMALL.n_sc, SMALL.m_sym)
    p = _path()
    y = synthesize_tensor([p], raa, SMALL, sel, grid).samples[0]
    pp, qq = np.meshgrid(np.arange(SMALL.n_sc), np.arange(SMALL.m_sym), indexing="ij")
    expected = -2 * np.pi * pp * SMALL.delta_f * p.delay + 2 * np.pi * p.doppler * qq * SMALL.T_s
    diff = np.angle(y / y[0, 0] * np.exp(-1j * expected))
    assert np.max(np.abs(diff)) < 1e-9


def test_tensor_flat_channel_is_outer_product():
    raa = RaaConfig.design(8)
    sel = SelectionMatrix((4, 6, 8))
    grid = SymbolGrid.qpsk(SMALL.n_sc, SMALL.m_sym, 1.0, 5)
    p = PathParams(1.3j, -0.3, 0.0, 0.0, True)
    y = synthesize_tensor([p], raa, SMALL, sel, grid).samples
    ref = p.gain * raa_response_vector(p.aoa, raa, [4, 6, 8])[:, None, None] * grid.data[None]
    assert np.allclose(y, ref, rtol=1e-14, atol=0)


def test_tensor_integer_sample_delay_ramp():
    raa = RaaConfig.design(8)
    sel = SelectionMatrix((6,))
    ofdm = OfdmConfig(n_sc=64, m_sym=2, n_rf=1)
    k = 3
    p = PathParams(1.0, 0.0, k * ofdm.T / ofdm.n_sc, 0.0, True)
    y = synthesize_tensor([p], raa, ofdm, sel, SymbolGrid.constant(64, 2)).samples[0, :, 0]
    assert np.allclose(y / y[0], np.exp(-1j * 2 * np.pi * np.arange(64) * k / 64))


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.sampled_from([8, 16, 32]), st.integers(min_value=1, max_value=2))
def test_tensor_matches_time_domain_oracle(seed, n_sc, n_paths):
    rng = np.random.default_rng(seed)
    ofdm = OfdmConfig(n_sc=n_sc, m_sym=2, n_rf=2)
    arr = RaaConfig.design(4)
    sel = SelectionMatrix((0, 2))
    paths = [PathParams(complex(*rng.normal(size=2)), rng.uniform(-1.2, 1.2),
                        rng.uniform(0.01, 0.99) * ofdm.t_cp, rng.uniform(-8e3, 8e3)) for _ in range(n_paths)]
    grid = SymbolGrid.qpsk(n_sc, 2, 1.0, rng)
    fast = synthesize_tensor(paths, arr, ofdm, sel, grid).samples
    ref = synthesize_time_domain_oracle(paths, arr, ofdm, sel, grid).samples
    assert np.max(np.abs(fast - ref) / np.abs(ref)) < 1e-9


def test_time_domain_oracle_ula_frontend():
    ofdm = OfdmConfig(n_sc=8, m_sym=2, n_rf=2)
    ula = UlaConfig(4)
    sel = SelectionMatrix((1, 2))
    paths = [_path(0.4, 3.3e-7, 1234.0)]
    grid = SymbolGrid.qpsk(8, 2, 1.0, 9)
    fast = synthesize_tensor(paths, ula, ofdm, sel, grid).samples
    ref = synthesize_time_domain_oracle(paths, ula, ofdm, sel, grid).samples
    assert np.allclose(fast, ref, rtol=1e-9, atol=1e-12)


def test_time_domain_oracle_size_limit():
    with pytest.raises(ValueError):
        synthesize_time_domain_oracle([], RaaConfig.design(4), OfdmConfig(n_sc=128, m_sym=2),
                                      SelectionMatrix((0,)), SymbolGrid.constant(128, 2))


def test_noise_calibration():
    ofdm = OfdmConfig(n_sc=64, m_sym=256, n_rf=8)
    grid = SymbolGrid.constant(64, 256)
    y = synthesize_tensor([], RaaConfig.design(128), ofdm, SelectionMatrix(tuple(range(8))), grid, noise_seed=4)
    assert y.samples.size >= 1e5
    assert np.mean(np.abs(y.samples) ** 2) == pytest.approx(ofdm.tensor_noise_var(128), rel=0.05)
    assert np.var(y.samples.real) == pytest.approx(ofdm.tensor_noise_var(128) / 2, rel=0.05)


def test_noise_is_deterministic_per_seed():
    a = synthesize_noise((2, 4, 3), 1.0, 7)
    b = synthesize_noise((2, 4, 3), 1.0, np.random.SeedSequence(7))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, synthesize_noise((2, 4, 3), 1.0, 8))


def test_selection_picks_matched_sula_first():
    raa = RaaConfig.design(16)
    p = PathParams(1.0, raa.eta[12], 1e-7, 0.0)
    sel = select_rays_energy(probe_outputs([p], raa, SMALL), 3, raa)
    assert sel.indices[0] == 12


def test_selection_matches_sort_oracle():
    raa = RaaConfig.design(128)
    p = PathParams(1.0, 0.7, 1e-7, 0.0)
    sel = select_rays_energy(probe_outputs([p], raa, SMALL), 8, raa)
    mags = np.abs(raa_response_vector(0.7, raa)) ** 2
    assert set(sel.indices) == set(np.argsort(mags)[::-1][:8].tolist())


def test_selection_two_equal_paths():
    raa = RaaConfig.design(16)
    paths = [PathParams(1.0, raa.eta[3], 1e-7, 0.0), PathParams(1.0, raa.eta[20], 2e-7, 0.0)]
    sel = select_rays_energy(probe_outputs(paths, raa, SMALL), 2, raa)
    assert set(sel.indices) == {3, 20}


def test_selection_tie_break_prefers_boresight():
    energy = np.ones((5, 2))
    raa = RaaConfig.design(4)  # N = 5, indices -2..2
    assert raa.N == 5
    assert select_rays_energy(energy, 3, raa).indices == (2, 1, 3)


def test_sweep_count():
    assert sweep_count(RaaConfig.design(128), 8) == 26


def test_selection_validation():
    with pytest.raises(ValueError):
        SelectionMatrix((1, 1))
    with pytest.raises(ValueError):
        SelectionMatrix((0, 99)).validate(RaaConfig.design(8))


def test_data_removal_single_path():
    raa = RaaConfig.design(8)
    sel = SelectionMatrix((5, 6, 7))
    grid = SymbolGrid.qpsk(SMALL.n_sc, SMALL.m_sym, 2.0, 1)
    p = _path()
    y = data_removal(synthesize_tensor([p], raa, SMALL, sel, grid), grid)
    flat = synthesize_tensor([p], raa, SMALL, sel, SymbolGrid.constant(SMALL.n_sc, SMALL.m_sym))
    assert y.kind == "data_removed"
    assert np.allclose(y.samples, flat.samples)


def test_data_removal_round_trip():
    rng = np.random.default_rng(0)
    grid = SymbolGrid.qpsk(4, 3, 2.0, rng)
    raw = SignalTensor(rng.normal(size=(2, 4, 3)) + 1j * rng.normal(size=(2, 4, 3)))
    removed = data_removal(raw, grid)
    back = data_removal(SignalTensor(removed.samples), SymbolGrid(grid.data.conj() / 2.0))
    assert np.allclose(back.samples, raw.samples)
    const = data_removal(raw, SymbolGrid.constant(4, 3, 4.0))
    assert np.allclose(const.samples, raw.samples / 2)


def test_data_removal_guards():
    raw = SignalTensor(np.ones((1, 2, 2), complex))
    with pytest.raises(ValueError):
        data_removal(SignalTensor(np.ones((1, 2, 2), complex), "data_removed"), SymbolGrid.constant(2, 2))
    with pytest.raises(ValueError):
        data_removal(raw, SymbolGrid(np.zeros((2, 2), complex)))


def test_delay_beyond_cp_rejected():
    with pytest.raises(ValueError):
        synthesize_tensor([_path(delay=SMALL.t_cp)], RaaConfig.design(8), SMALL, SelectionMatrix((0,)),
                          SymbolGrid.constant(SMALL.n_sc, SMALL.m_sym))
