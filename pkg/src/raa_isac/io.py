"""CSV writers and the binary tensor file format.

Tensor file layout (all little-endian)::

    bytes 0-3   magic b"RAAT"
    u16         format version (1)
    u8          kind: 0 raw, 1 data_removed
    u8          front-end: 0 RAA, 1 ULA
    u32 x 3     N_RF, N_sc, M_sym
    u32         number of selected ports K
    u32 x K     selected port indices
    f64 pairs   samples as interleaved (re, im), C order over (N_RF, N_sc, M_sym)
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .signal_model import SelectionMatrix, SignalTensor

MAGIC = b"RAAT"
VERSION = 1
_KINDS = ("raw", "data_removed")
_FRONTENDS = ("raa", "ula")


def write_tensor(path, tensor: SignalTensor, sel: SelectionMatrix, frontend: str) -> None:
    n_rf, n_sc, m_sym = tensor.samples.shape
    if n_rf != sel.n_rf:
        raise ValueError("selection size does not match tensor")
    header = struct.pack("<4sHBB3II", MAGIC, VERSION, _KINDS.index(tensor.kind),
                         _FRONTENDS.index(frontend), n_rf, n_sc, m_sym, sel.n_rf)
    ports = struct.pack(f"<{sel.n_rf}I", *sel.indices)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(ports)
        fh.write(np.ascontiguousarray(tensor.samples, dtype="<c16").tobytes())


def read_tensor(path):
    """Return ``(tensor, selection, frontend)``."""
    data = Path(path).read_bytes()
    head = struct.calcsize("<4sHBB3II")
    if len(data) < head:
        raise ValueError(f"{path}: truncated tensor header")
    magic, version, kind, frontend, n_rf, n_sc, m_sym, k = struct.unpack_from("<4sHBB3II", data)
    if magic != MAGIC or version != VERSION:
        raise ValueError(f"{path}: not a version-{VERSION} RAAT tensor file")
    ports = struct.unpack_from(f"<{k}I", data, head)
    offset = head + 4 * k
    expected = n_rf * n_sc * m_sym * 16
    if len(data) - offset != expected:
        raise ValueError(f"{path}: expected {expected} payload bytes, found {len(data) - offset}")
    samples = np.frombuffer(data, dtype="<c16", offset=offset).reshape(n_rf, n_sc, m_sym).astype(complex)
    return SignalTensor(samples, _KINDS[kind]), SelectionMatrix(tuple(ports)), _FRONTENDS[frontend]


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return "" if np.isnan(x) else f"{float(x):.12g}"
    return str(x)


def write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_scenario(path, paths) -> None:
    write_rows(path, ["alpha_re", "alpha_im", "aoa_deg", "delay_s", "doppler_hz"],
               [(p.gain.real, p.gain.imag, np.rad2deg(p.aoa), p.delay, p.doppler) for p in paths])


def read_scenario(path):
    from .signal_model import PathParams

    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [PathParams(complex(float(r["alpha_re"]), float(r["alpha_im"])), np.deg2rad(float(r["aoa_deg"])),
                       float(r["delay_s"]), float(r["doppler_hz"]), is_los=(k == 0))
            for k, r in enumerate(rows)]


def write_estimates(path, result) -> None:
    write_rows(path, ["target_id", "aoa_deg", "delay_s", "doppler_hz"],
               [(k, np.rad2deg(a), d, f) for k, (a, d, f)
                in enumerate(zip(result.aoas, result.delays, result.dopplers))])


def write_music(path, grid, power) -> None:
    write_rows(path, ["theta_deg", "power"], zip(np.rad2deg(grid), power))


def write_dd_map(path, dd: np.ndarray, pads, ofdm) -> None:
    """Delay-Doppler map with Doppler in the signed (FFT-shifted) convention."""
    n_p, n_q = dd.shape
    delays = np.arange(n_p) / (n_p * ofdm.delta_f)
    q = np.arange(n_q)
    dopplers = np.where(q > n_q / 2, q - n_q, q) / (n_q * ofdm.T_s)
    power_db = 10 * np.log10(np.maximum(dd, 1e-300))
    rows = ((delays[i], dopplers[j], power_db[i, j]) for i in range(n_p) for j in range(n_q))
    write_rows(path, ["delay_s", "doppler_hz", "power_db"], rows)
