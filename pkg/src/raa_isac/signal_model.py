"""Multipath channel and OFDM signal-tensor synthesis.

The fast path (:func:`synthesize_tensor`) writes the frequency-domain tensor
directly. :func:`synthesize_time_domain_oracle` builds the transmitted OFDM
waveform sample by sample, passes it through the delayed/Doppler-shifted
paths, removes the CP and runs the per-symbol DFT; it exists to cross-check
the fast path on tiny configurations.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .array_model import (SPEED_OF_LIGHT, RaaConfig, UlaConfig, num_ports,
                          port_orientation_rank, port_response)


@dataclass(frozen=True)
class OfdmConfig:
    f_c: float = 39e9
    n_sc: int = 512
    m_sym: int = 2048
    delta_f: float = 120e3
    t_cp: float = 9e-6 - 1 / 120e3
    tx_power: float = 1.0
    noise_var: float = 0.01
    n_rf: int = 8

    def __post_init__(self):
        if self.n_sc < 1 or self.m_sym < 1 or self.n_rf < 1:
            raise ValueError("n_sc, m_sym and n_rf must be positive")
        if self.delta_f <= 0 or self.t_cp < 0:
            raise ValueError("delta_f must be positive and t_cp non-negative")
        if self.tx_power <= 0 or self.noise_var < 0:
            raise ValueError("tx_power must be positive and noise_var non-negative")

    @property
    def T(self) -> float:
        return 1.0 / self.delta_f

    @property
    def T_s(self) -> float:
        return self.T + self.t_cp

    @property
    def bandwidth(self) -> float:
        return self.n_sc * self.delta_f

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.f_c

    @property
    def snr_db(self) -> float:
        return 10 * np.log10(self.tx_power / self.noise_var)

    def with_snr_db(self, snr_db: float) -> "OfdmConfig":
        return replace(self, noise_var=self.tx_power / 10 ** (snr_db / 10))

    def tensor_noise_var(self, M: int) -> float:
        """Per-component variance of the post-FFT noise, ``M sigma^2 / N_sc``."""
        return M * self.noise_var / self.n_sc


@dataclass(frozen=True)
class PathParams:
    gain: complex
    aoa: float
    delay: float
    doppler: float
    is_los: bool = False

    def cp_gain(self, t_cp: float) -> complex:
        """Gain rotated by the Doppler phase accrued over the CP."""
        return self.gain * np.exp(1j * 2 * np.pi * self.doppler * t_cp)


@dataclass(frozen=True)
class SymbolGrid:
    data: np.ndarray

    @classmethod
    def qpsk(cls, n_sc: int, m_sym: int, tx_power: float, rng) -> "SymbolGrid":
        rng = np.random.default_rng(rng)
        k = rng.integers(0, 4, size=(n_sc, m_sym))
        return cls(np.sqrt(tx_power) * np.exp(1j * (np.pi / 4 + np.pi / 2 * k)))

    @classmethod
    def constant(cls, n_sc: int, m_sym: int, tx_power: float = 1.0) -> "SymbolGrid":
        return cls(np.full((n_sc, m_sym), np.sqrt(tx_power), dtype=complex))


@dataclass(frozen=True)
class SelectionMatrix:
    """Ports routed to the RF chains (0-based port positions)."""

    indices: tuple

    def __post_init__(self):
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("selected ports must be distinct")

    @property
    def n_rf(self) -> int:
        return len(self.indices)

    def matrix(self, n_ports: int) -> np.ndarray:
        return np.eye(n_ports)[list(self.indices)]

    def validate(self, array) -> None:
        n = num_ports(array)
        if any(i < 0 or i >= n for i in self.indices):
            raise ValueError(f"selected port out of range for {n} ports")


@dataclass
class SignalTensor:
    samples: np.ndarray
    kind: str = "raw"

    def __post_init__(self):
        if self.kind not in ("raw", "data_removed"):
            raise ValueError(f"unknown tensor kind {self.kind!r}")
        if self.samples.ndim != 3:
            raise ValueError("tensor must be N_RF x N_sc x M_sym")


def make_swarm_scenario(centroid: float, count: int, spacing: float,
                        delay_mean: float, delay_var: float,
                        doppler_mean: float, doppler_var: float,
                        seed=None, t_cp: float = OfdmConfig.t_cp) -> list[PathParams]:
    """Equally spaced swarm around ``centroid`` with Gaussian delays/Dopplers.

    Path 0 is flagged LoS. Delays outside ``(0, t_cp)`` are redrawn.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    aoas = centroid + (np.arange(count) - (count - 1) / 2) * spacing
    if np.any(aoas <= -np.pi / 2) or np.any(aoas > np.pi / 2):
        raise ValueError("swarm AoA span leaves (-pi/2, pi/2]")
    if not 0 < delay_mean < t_cp:
        raise ValueError("delay mean must lie in (0, T_cp)")
    rng = np.random.default_rng(seed)
    delays = delay_mean + np.sqrt(delay_var) * rng.standard_normal(count)
    for _ in range(1000):
        bad = (delays <= 0) | (delays >= t_cp)
        if not bad.any():
            break
        delays[bad] = delay_mean + np.sqrt(delay_var) * rng.standard_normal(bad.sum())
    else:
        raise RuntimeError("could not draw delays inside (0, T_cp)")
    dopplers = doppler_mean + np.sqrt(doppler_var) * rng.standard_normal(count)
    phases = rng.uniform(0, 2 * np.pi, count)
    return [PathParams(gain=complex(np.exp(1j * phases[k])), aoa=float(aoas[k]),
                       delay=float(delays[k]), doppler=float(dopplers[k]), is_los=(k == 0))
            for k in range(count)]


def _check_paths(paths, ofdm: OfdmConfig) -> None:
    for p in paths:
        if p.delay >= ofdm.t_cp:
            raise ValueError(f"path delay {p.delay:g} s is not below T_cp={ofdm.t_cp:g} s")
        if p.delay < 0:
            raise ValueError("path delay must be non-negative")


def _array_M(array) -> int:
    return array.M


def synthesize_noise(shape, variance: float, seed) -> np.ndarray:
    """CSCG noise cube; symbol slice ``q`` uses its own spawned stream."""
    n_rf, n_sc, m_sym = shape
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = root.spawn(m_sym)
    out = np.empty(shape, dtype=complex)
    scale = np.sqrt(variance / 2)
    for q, child in enumerate(children):
        g = np.random.default_rng(child)
        out[:, :, q] = scale * (g.standard_normal((n_rf, n_sc)) + 1j * g.standard_normal((n_rf, n_sc)))
    return out


def synthesize_tensor(paths, array, ofdm: OfdmConfig, sel: SelectionMatrix | None,
                      grid: SymbolGrid, noise_seed=None) -> SignalTensor:
    """Raw received tensor ``Y[:, p, q]`` in the frequency domain.

    ``sel=None`` routes every port (used for the selection probe). Noise is
    omitted when ``noise_seed`` is None.
    """
    _check_paths(paths, ofdm)
    ports = None if sel is None else list(sel.indices)
    if sel is not None:
        sel.validate(array)
    n_sc, m_sym = grid.data.shape
    n_out = num_ports(array) if sel is None else sel.n_rf
    y = np.zeros((n_out, n_sc, m_sym), dtype=complex)
    if paths:
        aoa = np.array([p.aoa for p in paths])
        steer = port_response(aoa, array, ports)  # (n_out, L)
        gains = np.array([p.cp_gain(ofdm.t_cp) for p in paths])
        tau = np.array([p.delay for p in paths])
        fd = np.array([p.doppler for p in paths])
        p_idx = np.arange(n_sc)[:, None]
        q_idx = np.arange(m_sym)[:, None]
        ramp_p = np.exp(-1j * 2 * np.pi * p_idx * ofdm.delta_f * tau[None, :])
        ramp_q = np.exp(1j * 2 * np.pi * fd[None, :] * q_idx * ofdm.T_s)
        y = np.einsum("nl,pl,ql->npq", steer * gains[None, :], ramp_p, ramp_q)
        y = y * grid.data[None, :, :]
    if noise_seed is not None and ofdm.noise_var > 0:
        y = y + synthesize_noise(y.shape, ofdm.tensor_noise_var(_array_M(array)), noise_seed)
    return SignalTensor(y, "raw")


def transmit_waveform(t, grid: SymbolGrid, ofdm: OfdmConfig) -> np.ndarray:
    """CP-OFDM baseband ``x(t)``; symbol ``q`` occupies ``[q T_s, (q+1) T_s)``."""
    t = np.asarray(t, dtype=float)
    n_sc, m_sym = grid.data.shape
    x = np.zeros(t.shape, dtype=complex)
    p = np.arange(n_sc)
    for q in range(m_sym):
        rel = t - q * ofdm.T_s
        inside = (rel >= 0) & (rel < ofdm.T_s)
        if not inside.any():
            continue
        ph = np.exp(1j * 2 * np.pi * ofdm.delta_f * np.outer(t[inside] - q * ofdm.T_s - ofdm.t_cp, p))
        x[inside] += ph @ grid.data[:, q]
    return x


def synthesize_time_domain_oracle(paths, array, ofdm: OfdmConfig, sel: SelectionMatrix,
                                  grid: SymbolGrid) -> SignalTensor:
    """Noiseless tensor built from the time-domain waveform (desk scale only)."""
    n_sc, m_sym = grid.data.shape
    if n_sc > 64 or m_sym > 8:
        raise ValueError("time-domain oracle is limited to N_sc <= 64, M_sym <= 8")
    _check_paths(paths, ofdm)
    sel.validate(array)
    ports = list(sel.indices)
    i = np.arange(n_sc)
    dft = np.exp(-1j * 2 * np.pi * np.outer(i, i) / n_sc) / n_sc
    y = np.zeros((sel.n_rf, n_sc, m_sym), dtype=complex)
    for q in range(m_sym):
        # post-CP-removal sampling instants of symbol q
        t = q * ofdm.T_s + ofdm.t_cp + i * ofdm.T / n_sc
        for path in paths:
            steer = port_response(path.aoa, array, ports)
            doppler = np.exp(1j * 2 * np.pi * path.doppler * (q * ofdm.T_s + ofdm.t_cp))
            samples = path.gain * doppler * transmit_waveform(t - path.delay, grid, ofdm)
            y[:, :, q] += np.outer(steer, dft @ samples)
    return SignalTensor(y, "raw")


def probe_outputs(paths, array, ofdm: OfdmConfig, noise_seed=None, symbols: int = 1) -> np.ndarray:
    """All-port probe cube ``N x N_sc x symbols`` used for ray selection."""
    grid = SymbolGrid.constant(ofdm.n_sc, symbols, ofdm.tx_power)
    return synthesize_tensor(paths, array, ofdm, None, grid, noise_seed).samples


def sweep_count(array, n_rf: int) -> int:
    """Number of sequential port sweeps a real RSN would need."""
    return -(-num_ports(array) // n_rf)


def select_rays_energy(full_outputs: np.ndarray, n_rf: int, array=None) -> SelectionMatrix:
    """Pick the ``n_rf`` ports with the largest probe energy.

    Ties go to the port looking closer to boresight, then to the lower index.
    """
    energy = np.sum(np.abs(full_outputs) ** 2, axis=tuple(range(1, full_outputs.ndim)))
    if n_rf > energy.size:
        raise ValueError(f"cannot select {n_rf} of {energy.size} ports")
    idx = np.arange(energy.size)
    rank = port_orientation_rank(array) if array is not None else np.zeros(energy.size)
    order = np.lexsort((idx, rank, -energy))
    return SelectionMatrix(tuple(int(i) for i in order[:n_rf]))


def data_removal(y: SignalTensor, grid: SymbolGrid) -> SignalTensor:
    if y.kind != "raw":
        raise ValueError("data removal expects a raw tensor")
    if np.any(grid.data == 0):
        raise ValueError("symbol grid contains zero symbols")
    return SignalTensor(y.samples / grid.data[None, :, :], "data_removed")
