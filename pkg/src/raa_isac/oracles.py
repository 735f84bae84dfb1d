"""Independent reference computations used by ``oracle-check``.

Each check rebuilds a quantity by a route that shares no code path with the
fast implementation (explicit element sums, time-domain waveforms, dense
quadrature) and reports the worst discrepancy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .array_model import (ISOTROPIC_ELEMENT, RAA_ELEMENT, ULA_ELEMENT, RaaConfig, UlaConfig,
                          port_response, total_power_gain)
from .signal_model import (OfdmConfig, PathParams, SelectionMatrix, SymbolGrid, synthesize_noise,
                           synthesize_tensor, synthesize_time_domain_oracle)


@dataclass
class OracleResult:
    name: str
    error: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return bool(np.isfinite(self.error) and self.error < self.tolerance)

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}: error={self.error:.3e} tol={self.tolerance:.1e}"


def brute_sula_response(theta: float, eta: float, cfg: RaaConfig) -> complex:
    """Explicit sum over the ``M`` elements of one sULA."""
    zeta = theta - eta
    m = np.arange(cfg.M)
    pos = cfg.D + m * cfg.wavelength / 2
    return complex(np.sqrt(cfg.element.gain(zeta)) * np.sum(np.exp(1j * 2 * np.pi * pos * np.sin(zeta) / cfg.wavelength)))


def brute_ula_port(theta: float, n: int, cfg: UlaConfig) -> complex:
    """Codeword ``n`` applied element by element."""
    s = cfg.codeword_sines[n]
    acc = 0j
    for m in range(cfg.M):
        acc += np.exp(-1j * np.pi * m * s) * np.exp(1j * np.pi * m * np.sin(theta))
    return complex(np.sqrt(cfg.element.gain(theta)) * acc)


def element_level_check(M: int = 16, seed: int = 7) -> OracleResult:
    rng = np.random.default_rng(seed)
    raa = RaaConfig.design(M)
    ula = UlaConfig(M)
    err = 0.0
    for theta in rng.uniform(-np.pi / 2, np.pi / 2, 16):
        fast = port_response(theta, raa)
        ref = np.array([brute_sula_response(theta, e, raa) for e in raa.eta])
        err = max(err, np.max(np.abs(fast - ref)) / M)
        fast = port_response(theta, ula)
        ref = np.array([brute_ula_port(theta, n, ula) for n in range(ula.n_codewords)])
        err = max(err, np.max(np.abs(fast - ref)) / M)
    return OracleResult(f"element-level responses (M={M})", float(err), 1e-10)


def time_frequency_check(n_sc: int, m_sym: int = 2, M: int = 4, n_paths: int = 2, seed: int = 0) -> OracleResult:
    """Frequency-domain tensor versus the time-domain waveform model."""
    rng = np.random.default_rng(seed)
    ofdm = OfdmConfig(f_c=39e9, n_sc=n_sc, m_sym=m_sym, n_rf=3)
    raa = RaaConfig.design(M)
    sel = SelectionMatrix(tuple(range(3)))
    # fractional delays: deliberately off the 1/(N_sc df) sample grid
    paths = [PathParams(complex(rng.normal(), rng.normal()), rng.uniform(-1.2, 1.2),
                        rng.uniform(0.05, 0.95) * ofdm.t_cp, rng.uniform(-5e3, 5e3), k == 0)
             for k in range(n_paths)]
    grid = SymbolGrid.qpsk(n_sc, m_sym, 1.0, rng)
    fast = synthesize_tensor(paths, raa, ofdm, sel, grid).samples
    ref = synthesize_time_domain_oracle(paths, raa, ofdm, sel, grid).samples
    err = np.max(np.abs(fast - ref) / np.maximum(np.abs(ref), 1e-300))
    return OracleResult(f"time vs frequency domain (N_sc={n_sc}, M_sym={m_sym}, L={n_paths})", float(err), 1e-9)


def noise_calibration_check(M: int = 128, samples: int = 200_000, seed: int = 11) -> OracleResult:
    ofdm = OfdmConfig(n_sc=64, m_sym=-(-samples // (8 * 64)), noise_var=0.01)
    target = ofdm.tensor_noise_var(M)
    noise = synthesize_noise((8, ofdm.n_sc, ofdm.m_sym), target, seed)
    # per real component variance is half the complex variance
    comp = np.concatenate([noise.real.ravel(), noise.imag.ravel()])
    err = abs(2 * np.var(comp) - target) / target
    return OracleResult(f"noise variance M sigma^2/N_sc over {noise.size} samples", float(err), 0.05)


def total_gain_check() -> OracleResult:
    """Adaptive quadrature against a dense trapezoid rule."""
    theta = np.linspace(-np.pi, np.pi, 2_000_001)
    err = 0.0
    for el in (RAA_ELEMENT, ULA_ELEMENT, ISOTROPIC_ELEMENT):
        ref = np.trapezoid(el.gain(theta), theta) if hasattr(np, "trapezoid") else np.trapz(el.gain(theta), theta)
        err = max(err, abs(total_power_gain(el) - ref) / ref)
    return OracleResult("total element power gain quadrature", float(err), 1e-8)


def run_all() -> list:
    results = [element_level_check(8), element_level_check(16)]
    for n_sc in (8, 16, 32):
        for n_paths in (1, 2):
            results.append(time_frequency_check(n_sc, n_paths=n_paths, seed=n_sc + n_paths))
    results.append(noise_calibration_check())
    results.append(total_gain_check())
    return results
