"""AoA / delay / Doppler estimation for RAA and ULA-HBF front-ends.

Pipeline: snapshot reshaping, covariance EVD, MUSIC search, peak picking,
per-target zero-forcing spatial filters and a zero-padded 2D periodogram
whose peak is mapped back to delay and Doppler.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .array_model import RaaConfig, UlaConfig, port_response
from .beam_analysis import gamma_raa
from .signal_model import OfdmConfig, SelectionMatrix, SignalTensor

_MUSIC_FLOOR = 1e-18


class EstimationError(RuntimeError):
    """Raised when a pipeline stage cannot produce an estimate."""


@dataclass
class SubspaceDecomposition:
    signal_basis: np.ndarray
    noise_basis: np.ndarray
    eigenvalues: np.ndarray
    covariance: np.ndarray


@dataclass
class EstimationResult:
    aoas: list
    delays: list
    dopplers: list
    music_grid: np.ndarray
    music_power: np.ndarray
    dd_maps: list = field(default_factory=list)
    failure: str | None = None

    @property
    def detected_count(self) -> int:
        return len(self.aoas)


def reshape_snapshots(y: SignalTensor) -> np.ndarray:
    """Stack the ``(p, q)`` slices as columns, q-major in blocks of ``N_sc``.

    Column ``p + q N_sc`` holds ``Y[:, p, q]`` (see :func:`snapshot_column`).
    """
    if y.kind != "data_removed":
        raise ValueError("snapshots are formed from the data-removed tensor")
    n_rf, n_sc, m_sym = y.samples.shape
    return y.samples.transpose(0, 2, 1).reshape(n_rf, n_sc * m_sym)


def snapshot_column(p: int, q: int, n_sc: int) -> int:
    return p + q * n_sc


def unreshape_snapshots(Y: np.ndarray, n_sc: int, m_sym: int) -> SignalTensor:
    n_rf = Y.shape[0]
    return SignalTensor(Y.reshape(n_rf, m_sym, n_sc).transpose(0, 2, 1), "data_removed")


def covariance_evd(snapshots: np.ndarray, source_count: int) -> SubspaceDecomposition:
    """Sample covariance ``Y Y^H / K`` split into signal and noise subspaces."""
    n_rf, k = snapshots.shape
    if source_count >= n_rf:
        raise EstimationError(f"source count {source_count} leaves no noise subspace with {n_rf} RF chains")
    if source_count < 1:
        raise ValueError("source count must be >= 1")
    if k < n_rf:
        raise ValueError("need at least N_RF snapshots")
    C = snapshots @ snapshots.conj().T / k
    C = 0.5 * (C + C.conj().T)
    w, V = np.linalg.eigh(C)
    order = np.argsort(w)[::-1]
    w, V = np.clip(w[order], 0, None), V[:, order]
    return SubspaceDecomposition(V[:, :source_count], V[:, source_count:], w, C)


def steering(theta, array, sel: SelectionMatrix) -> np.ndarray:
    """Equivalent steering ``h_s(theta)`` (``(N_RF,)`` or ``(N_RF, K)``)."""
    return port_response(theta, array, list(sel.indices))


def default_music_grid(M: int) -> np.ndarray:
    step = 0.02 if M >= 64 else 0.1
    return np.deg2rad(np.arange(-89.9, 89.9 + step / 2, step))


def coverage_mask(grid: np.ndarray, array, sel: SelectionMatrix, floor_db: float) -> np.ndarray:
    """Directions whose selected-port steering power is within ``floor_db`` of its maximum.

    Outside this sector the selected beams collect almost no energy, so a
    norm-normalized spectrum there is dominated by noise-subspace residue.
    """
    norm = np.sum(np.abs(steering(np.asarray(grid, dtype=float), array, sel)) ** 2, axis=0)
    return norm >= norm.max() * 10 ** (-floor_db / 10)


def music_spectrum(dec: SubspaceDecomposition, array, sel: SelectionMatrix,
                   grid: np.ndarray, normalize: bool = True):
    """MUSIC pseudo-spectrum on ``grid``.

    With ``normalize`` the steering vectors are scaled to unit norm, so ports
    whose look direction is far from ``theta`` cannot inflate the spectrum.
    """
    grid = np.asarray(grid, dtype=float)
    H = steering(grid, array, sel)
    proj = dec.noise_basis.conj().T @ H
    den = np.sum(np.abs(proj) ** 2, axis=0)
    if normalize:
        norm = np.sum(np.abs(H) ** 2, axis=0)
        den = den / np.where(norm > 0, norm, 1.0)
    return grid, 1.0 / np.maximum(den, _MUSIC_FLOOR)


def find_peaks(grid: np.ndarray, power: np.ndarray, max_count: int, min_separation: float,
               min_prominence_db: float | None = None, candidates: np.ndarray | None = None) -> list:
    """Greedy peak picking on a uniformly sampled spectrum.

    Local maxima (strictly above both neighbours) are refined by a parabola
    through the three dB samples, sorted by height and accepted while they
    keep ``min_separation`` from every accepted peak. When
    ``min_prominence_db`` is set, peaks less than that far above the
    spectrum median are ignored. ``candidates`` is an optional boolean mask
    over ``grid`` restricting where peaks may be reported.
    """
    grid = np.asarray(grid, dtype=float)
    db = 10 * np.log10(np.maximum(np.asarray(power, dtype=float), 1e-300))
    if db.size < 3:
        return []
    interior = np.arange(1, db.size - 1)
    is_peak = (db[interior] > db[interior - 1]) & (db[interior] > db[interior + 1])
    idx = interior[is_peak]
    if candidates is not None:
        idx = idx[np.asarray(candidates, dtype=bool)[idx]]
    if min_prominence_db is not None:
        idx = idx[db[idx] >= np.median(db) + min_prominence_db]
    if idx.size == 0:
        return []
    step = grid[1] - grid[0]
    left, mid, right = db[idx - 1], db[idx], db[idx + 1]
    curv = left - 2 * mid + right
    offset = np.where(curv < 0, 0.5 * (left - right) / np.where(curv < 0, curv, -1.0), 0.0)
    angles = grid[idx] + offset * step
    heights = mid - 0.25 * (left - right) * offset
    accepted = []
    for k in np.argsort(heights)[::-1]:
        if len(accepted) >= max_count:
            break
        if all(abs(angles[k] - a) >= min_separation for a in accepted):
            accepted.append(float(angles[k]))
    return accepted


def zf_vector(k: int, aoas, array, sel: SelectionMatrix) -> np.ndarray:
    """Unit-norm zero-forcing combiner for estimate ``k`` against the others."""
    aoas = np.asarray(aoas, dtype=float)
    h = steering(aoas[k], array, sel)
    others = np.delete(aoas, k)
    if others.size == 0:
        v = h
    else:
        Hk = steering(others, array, sel)
        gram = Hk.conj().T @ Hk
        if np.linalg.cond(gram) > 1e12:
            raise EstimationError("estimated steering vectors are numerically dependent")
        v = h - Hk @ np.linalg.solve(gram, Hk.conj().T @ h)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise EstimationError("zero-forcing projection annihilated the target")
    return v / norm


def spatial_filter(y: SignalTensor, h_zf: np.ndarray) -> np.ndarray:
    """Beamformed ``N_sc x M_sym`` matrix ``h_zf^H Y[:, p, q]``."""
    return np.einsum("n,npq->pq", h_zf.conj(), y.samples)


def periodogram_2d(yk: np.ndarray, pad_p: int = 8, pad_q: int = 8) -> np.ndarray:
    """Squared magnitude of IFFT over subcarriers then FFT over symbols.

    Both transforms are unnormalised, so a unit on-bin bi-exponential peaks
    at ``(N_sc M_sym)**2`` and, for unit padding, the total energy is
    ``N_sc M_sym`` times the input energy.
    """
    if pad_p < 1 or pad_q < 1 or int(pad_p) != pad_p or int(pad_q) != pad_q:
        raise ValueError("padding factors must be integers >= 1")
    n_sc, m_sym = yk.shape
    z = np.fft.ifft(yk, n=int(pad_p) * n_sc, axis=0, norm="forward")
    z = np.fft.fft(z, n=int(pad_q) * m_sym, axis=1)
    return np.abs(z) ** 2


def map_peak_to_params(p_idx, q_idx, pads, ofdm: OfdmConfig):
    """Map padded-grid peak indices to ``(delay_s, doppler_hz)``.

    Doppler indices above half the padded length wrap to negative values.
    """
    pad_p, pad_q = pads
    n_p, n_q = pad_p * ofdm.n_sc, pad_q * ofdm.m_sym
    tau = p_idx / (n_p * ofdm.delta_f)
    q_signed = q_idx - n_q if q_idx > n_q / 2 else q_idx
    return float(tau), float(q_signed / (n_q * ofdm.T_s))


def _delay_doppler(yk, pads, ofdm):
    dd = periodogram_2d(yk, *pads)
    p_hat, q_hat = np.unravel_index(np.argmax(dd), dd.shape)
    tau, fd = map_peak_to_params(int(p_hat), int(q_hat), pads, ofdm)
    return tau, fd, dd


def run_pipeline(y: SignalTensor, array, sel: SelectionMatrix, ofdm: OfdmConfig,
                 source_count: int, grid=None, pads=(8, 8), min_separation=None,
                 min_prominence_db: float | None = 10.0, normalize: bool = True,
                 coverage_db: float | None = 20.0, keep_maps: bool = False) -> EstimationResult:
    """Full MUSIC + ZF + periodogram estimation on a data-removed tensor."""
    if grid is None:
        grid = default_music_grid(array.M)
    if min_separation is None:
        min_separation = gamma_raa(array.M) / 4
    Y = reshape_snapshots(y)
    dec = covariance_evd(Y, source_count)
    grid, power = music_spectrum(dec, array, sel, grid, normalize=normalize)
    candidates = None if coverage_db is None else coverage_mask(grid, array, sel, coverage_db)
    aoas = find_peaks(grid, power, source_count, min_separation, min_prominence_db, candidates)
    result = EstimationResult(aoas=[], delays=[], dopplers=[], music_grid=grid, music_power=power)
    if not aoas:
        result.failure = "no MUSIC peaks detected"
        return result
    delays, dopplers, maps = [], [], []
    for k in range(len(aoas)):
        h = zf_vector(k, aoas, array, sel)
        tau, fd, dd = _delay_doppler(spatial_filter(y, h), pads, ofdm)
        delays.append(tau)
        dopplers.append(fd)
        if keep_maps:
            maps.append(dd)
    result.aoas, result.delays, result.dopplers, result.dd_maps = aoas, delays, dopplers, maps
    return result


def ula_hbf_pipeline(y: SignalTensor, ula: UlaConfig, sel: SelectionMatrix, ofdm: OfdmConfig,
                     source_count: int, **kwargs) -> EstimationResult:
    """Benchmark pipeline with codeword-combined ULA steering vectors.

    Failures (no peaks, singular ZF) are reported in ``failure`` instead of
    raised, since the benchmark is expected to break down near endfire.
    """
    if not isinstance(ula, UlaConfig):
        raise TypeError("ula_hbf_pipeline expects a UlaConfig")
    return safe_pipeline(y, ula, sel, ofdm, source_count, **kwargs)


def safe_pipeline(y, array, sel, ofdm, source_count, **kwargs) -> EstimationResult:
    try:
        return run_pipeline(y, array, sel, ofdm, source_count, **kwargs)
    except EstimationError as exc:
        grid = kwargs.get("grid")
        grid = default_music_grid(array.M) if grid is None else np.asarray(grid)
        return EstimationResult([], [], [], grid, np.zeros_like(grid), failure=str(exc))
