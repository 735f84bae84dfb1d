"""Equivalent uplink channel and expected communication rate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .array_model import port_response
from .signal_model import OfdmConfig, SelectionMatrix, probe_outputs, select_rays_energy


@dataclass
class RateReport:
    """Rate in bits/s/Hz (CP overhead included via ``1 / (B T_s)``)."""

    rate: float
    stderr: float
    trial_rates: np.ndarray
    per_subcarrier_snr: np.ndarray
    fingerprint: str = ""


def equivalent_channel(paths, array, sel: SelectionMatrix, ofdm: OfdmConfig, p, q):
    """``h_pq = S sum_l alpha_l e^{j2pi f_D T_cp} r(theta_l) e^{-j2pi p df tau_l} e^{j2pi f_D q T_s}``.

    ``p`` and ``q`` may be arrays; the result then has shape ``(N_RF,) + broadcast(p, q).shape``.
    """
    p, q = np.broadcast_arrays(np.asarray(p), np.asarray(q))
    h = np.zeros((sel.n_rf,) + p.shape, dtype=complex)
    for path in paths:
        steer = port_response(path.aoa, array, list(sel.indices)) * path.cp_gain(ofdm.t_cp)
        phase = np.exp(-1j * 2 * np.pi * p * ofdm.delta_f * path.delay
                       + 1j * 2 * np.pi * path.doppler * q * ofdm.T_s)
        h += steer.reshape((-1,) + (1,) * p.ndim) * phase
    return h


def channel_grid(paths, array, sel, ofdm: OfdmConfig) -> np.ndarray:
    """``(N_RF, N_sc, M_sym)`` equivalent channel over the whole CPI."""
    p, q = np.meshgrid(np.arange(ofdm.n_sc), np.arange(ofdm.m_sym), indexing="ij")
    return equivalent_channel(paths, array, sel, ofdm, p, q)


def per_subcarrier_snr(paths, array, sel, ofdm: OfdmConfig) -> np.ndarray:
    h = channel_grid(paths, array, sel, ofdm)
    noise = ofdm.tensor_noise_var(array.M)
    return np.sum(np.abs(h) ** 2, axis=0) * ofdm.tx_power / noise


def rate_from_snr(snr: np.ndarray, ofdm: OfdmConfig) -> float:
    m_sym = snr.shape[1]
    return float(np.sum(np.log2(1 + snr)) / m_sym / (ofdm.bandwidth * ofdm.T_s))


def instantaneous_rate(paths, array, sel, ofdm: OfdmConfig):
    """``(snr, rate)`` for one channel realisation."""
    snr = per_subcarrier_snr(paths, array, sel, ofdm)
    return snr, rate_from_snr(snr, ofdm)


def expected_rate(sampler, array, ofdm: OfdmConfig, trials: int, seed=None,
                  sel: SelectionMatrix | None = None) -> RateReport:
    """Monte-Carlo average of the uplink rate.

    ``sampler(seed_sequence)`` returns a path list. Without a fixed ``sel``
    the RF chains are re-selected per trial from a noisy one-symbol probe.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    children = np.random.SeedSequence(seed).spawn(trials)
    rates = np.empty(trials)
    snr_sum = np.zeros((ofdm.n_sc, ofdm.m_sym))
    for i, child in enumerate(children):
        scen_seed, probe_seed = child.spawn(2)
        paths = sampler(scen_seed)
        trial_sel = sel
        if trial_sel is None:
            probe = probe_outputs(paths, array, ofdm, probe_seed)
            trial_sel = select_rays_energy(probe, ofdm.n_rf, array)
        snr, rates[i] = instantaneous_rate(paths, array, trial_sel, ofdm)
        snr_sum += snr
    stderr = float(np.std(rates, ddof=1) / np.sqrt(trials)) if trials > 1 else float("nan")
    return RateReport(float(np.mean(rates)), stderr, rates, snr_sum / trials)
