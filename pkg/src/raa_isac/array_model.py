"""Array geometries, element patterns and array-response primitives.

Two receive front-ends are modelled:

* the ray antenna array (RAA): ``N`` simple ULAs (sULAs) of ``M`` directly
  combined half-wavelength elements, fanned at orientations ``eta_n``;
* the conventional ULA with a DFT codebook for hybrid beamforming.

Both expose a set of *ports* (sULA outputs or codeword outputs) through
:func:`port_response`; the RF-chain selection then picks ``N_RF`` of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

SPEED_OF_LIGHT = 299792458.0

_SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class ElementPattern:
    """3GPP-style (or isotropic) element radiation pattern.

    Gain in dB is ``peak_gain_db - min(12 (theta / beamwidth_3db)**2, front_to_back_db)``
    for the ``threegpp`` kind and the constant ``peak_gain_db`` for ``isotropic``.
    """

    peak_gain_db: float = 0.0
    beamwidth_3db: float = np.pi
    kind: str = "threegpp"
    front_to_back_db: float = 30.0

    def __post_init__(self):
        if self.kind not in ("threegpp", "isotropic"):
            raise ValueError(f"unknown element kind {self.kind!r}")
        if self.kind == "threegpp" and not self.beamwidth_3db > 0:
            raise ValueError("beamwidth_3db must be positive")

    def gain_db(self, theta):
        theta = _wrap(np.asarray(theta, dtype=float))
        if self.kind == "isotropic":
            return np.full_like(theta, self.peak_gain_db)
        atten = np.minimum(12.0 * (theta / self.beamwidth_3db) ** 2, self.front_to_back_db)
        return self.peak_gain_db - atten

    def gain(self, theta):
        return 10.0 ** (self.gain_db(theta) / 10.0)


# Element presets used in the RAA/ULA comparisons (equal total power gain).
RAA_ELEMENT = ElementPattern(peak_gain_db=5.1335, beamwidth_3db=0.3 * np.pi)
ULA_ELEMENT = ElementPattern(peak_gain_db=0.0, beamwidth_3db=np.pi)
ISOTROPIC_ELEMENT = ElementPattern(peak_gain_db=-2.816, kind="isotropic")


def _wrap(theta):
    """Map angles to (-pi, pi]."""
    wrapped = np.mod(theta + np.pi, 2 * np.pi) - np.pi
    return np.where(wrapped == -np.pi, np.pi, wrapped)


def element_gain(theta, pattern: ElementPattern):
    """Linear power gain of ``pattern`` at ``theta`` (radians)."""
    return pattern.gain(theta)


def total_power_gain(pattern: ElementPattern) -> float:
    """Integral of the linear element gain over (-pi, pi]."""
    if pattern.kind == "isotropic":
        return 2 * np.pi * 10.0 ** (pattern.peak_gain_db / 10.0)
    # split at the clamp knees so the quadrature never straddles a kink
    knee = pattern.beamwidth_3db * np.sqrt(pattern.front_to_back_db / 12.0)
    points = [p for p in (-knee, knee) if -np.pi < p < np.pi]
    value, _ = quad(lambda t: float(pattern.gain(t)), -np.pi, np.pi,
                    points=points or None, epsabs=1e-9, limit=200)
    return value


def dirichlet_kernel(x, M: int):
    """Normalised array factor ``e^{j pi (M-1) x / 2} sin(pi M x / 2) / (M sin(pi x / 2))``.

    The removable singularities at even integers ``x`` are replaced by the
    analytic limit, which has unit magnitude.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    x = np.asarray(x, dtype=float)
    den = M * np.sin(np.pi * x / 2)
    singular = np.abs(np.sin(np.pi * x / 2)) < _SINGULAR_TOL
    safe_den = np.where(singular, 1.0, den)
    ratio = np.sin(np.pi * M * x / 2) / safe_den
    # limit of the ratio at x = 2k is (-1)^{k (M - 1)}
    k = np.rint(x / 2)
    ratio = np.where(singular, np.where(np.mod(k * (M - 1), 2) == 0, 1.0, -1.0), ratio)
    out = np.exp(1j * np.pi * (M - 1) * x / 2) * ratio
    return out if out.ndim else complex(out)


def design_orientations(M: int, eta_max: float = np.pi / 2):
    """Orientation set of an RAA with adjacent-null spacing ``arcsin(2/M)``.

    The count ``2 floor(eta_max / arcsin(2/M) + 1)`` is always even; the
    outermost positive-index sULA is dropped so the set stays symmetric about
    ``eta_0 = 0``. Returns ``(N, orientations)``.
    """
    if M < 2:
        raise ValueError("M must be >= 2 (arcsin(2/M) undefined)")
    if not 0 < eta_max <= np.pi / 2:
        raise ValueError("eta_max must lie in (0, pi/2]")
    step = np.arcsin(2.0 / M)
    count = 2 * int(np.floor(eta_max / step + 1))
    if count % 2 == 0:
        count -= 1
    half = (count - 1) // 2
    n = np.arange(-half, half + 1)
    return count, n * step


def min_base_offset(M: int, wavelength: float) -> float:
    """Smallest first-element distance keeping all elements >= lambda/2 apart."""
    if M < 2:
        raise ValueError("M must be >= 2")
    return wavelength / (4 * np.sin(0.5 * np.arcsin(2.0 / M)))


@dataclass(frozen=True)
class RaaConfig:
    M: int
    orientations: tuple
    D: float
    wavelength: float
    element: ElementPattern = RAA_ELEMENT
    eta_max: float = np.pi / 2

    def __post_init__(self):
        eta = np.asarray(self.orientations, dtype=float)
        if eta.size % 2 != 1:
            raise ValueError("number of sULAs must be odd")
        if not np.all(np.diff(eta) > 0):
            raise ValueError("orientations must be strictly increasing")
        if not np.allclose(eta, -eta[::-1], atol=1e-15, rtol=0):
            raise ValueError("orientations must be symmetric about 0")
        if np.max(np.abs(eta)) > self.eta_max + 1e-12:
            raise ValueError("orientation exceeds eta_max")
        if self.D < min_base_offset(self.M, self.wavelength) * (1 - 1e-12):
            raise ValueError("base offset D violates the minimum-spacing bound")

    @classmethod
    def design(cls, M: int, eta_max: float = np.pi / 2, f_c: float = 39e9,
               element: ElementPattern = RAA_ELEMENT, D: float | None = None,
               N: int | None = None) -> "RaaConfig":
        """Build the designed RAA. ``N`` (odd) optionally truncates the fan."""
        count, eta = design_orientations(M, eta_max)
        if N is not None:
            if N % 2 != 1 or N < 1:
                raise ValueError("N must be a positive odd integer")
            if N > count:
                raise ValueError(f"N={N} exceeds the {count} sULAs that fit within eta_max")
            half = (N - 1) // 2
            eta = eta[(count - 1) // 2 - half:(count - 1) // 2 + half + 1]
        wavelength = SPEED_OF_LIGHT / f_c
        if D is None:
            D = min_base_offset(M, wavelength)
        return cls(M=M, orientations=tuple(eta), D=D, wavelength=wavelength,
                   element=element, eta_max=eta_max)

    @property
    def N(self) -> int:
        return len(self.orientations)

    @property
    def eta(self) -> np.ndarray:
        return np.asarray(self.orientations)

    @property
    def index_set(self) -> np.ndarray:
        """Orientation indices n in {-(N-1)/2, ..., (N-1)/2}, in port order."""
        half = (self.N - 1) // 2
        return np.arange(-half, half + 1)


@dataclass(frozen=True)
class UlaConfig:
    M: int
    element: ElementPattern = ULA_ELEMENT
    codebook_size: int | None = None
    spacing_wavelengths: float = field(default=0.5)

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if self.codebook_size is not None and self.codebook_size < 1:
            raise ValueError("codebook_size must be positive")

    @property
    def n_codewords(self) -> int:
        return self.M if self.codebook_size is None else self.codebook_size

    @property
    def codeword_sines(self) -> np.ndarray:
        n = np.arange(1, self.n_codewords + 1)
        return -1.0 + 2.0 * (n - 1) / self.n_codewords

    @property
    def codeword_angles(self) -> np.ndarray:
        return np.arcsin(self.codeword_sines)


def sula_ref_response(zeta, cfg: RaaConfig):
    """Reference-element response ``e^{j 2 pi D sin(zeta) / lambda} sqrt(G(zeta))``."""
    zeta = np.asarray(zeta, dtype=float)
    out = np.exp(1j * 2 * np.pi / cfg.wavelength * cfg.D * np.sin(zeta)) * np.sqrt(cfg.element.gain(zeta))
    return out if out.ndim else complex(out)


def sula_response(theta, eta, cfg: RaaConfig):
    """Combined output of a sULA with orientation ``eta`` for a path from ``theta``."""
    zeta = np.asarray(theta, dtype=float) - np.asarray(eta, dtype=float)
    out = cfg.M * sula_ref_response(zeta, cfg) * dirichlet_kernel(np.sin(zeta), cfg.M)
    return out


def raa_response_vector(theta, cfg: RaaConfig, ports=None):
    """RAA response ``r(theta)``.

    Scalar ``theta`` gives shape ``(N,)``; an array of ``K`` angles gives
    ``(N, K)``. ``ports`` restricts the output to the listed port indices.
    """
    eta = cfg.eta if ports is None else cfg.eta[np.asarray(ports)]
    theta = np.asarray(theta, dtype=float)
    if theta.ndim == 0:
        return sula_response(theta, eta, cfg)
    return sula_response(theta[None, :], eta[:, None], cfg)


def ula_response_vector(theta, cfg: UlaConfig):
    """``a(theta) = [e^{j pi (m-1) sin theta}]``; ``(M,)`` or ``(M, K)``."""
    theta = np.asarray(theta, dtype=float)
    m = np.arange(cfg.M)
    phase = 2 * np.pi * cfg.spacing_wavelengths * np.sin(theta)
    if theta.ndim == 0:
        return np.exp(1j * m * phase)
    return np.exp(1j * np.outer(m, phase))


def dft_codebook(cfg: UlaConfig) -> np.ndarray:
    """Codebook matrix ``[a(phi_1), ..., a(phi_N')]`` of shape ``(M, N')``."""
    m = np.arange(cfg.M)[:, None]
    return np.exp(1j * np.pi * m * cfg.codeword_sines[None, :])


def num_ports(array) -> int:
    if isinstance(array, RaaConfig):
        return array.N
    if isinstance(array, UlaConfig):
        return array.n_codewords
    raise TypeError(f"unsupported array type {type(array).__name__}")


def port_response(theta, array, ports=None):
    """Per-port noiseless response to a unit path from ``theta``.

    For the RAA this is ``r(theta)``; for the ULA it is the codeword-combined
    output ``W^H (sqrt(G_ULA(theta)) a(theta))``. Shapes follow
    :func:`raa_response_vector`.
    """
    if isinstance(array, RaaConfig):
        return raa_response_vector(theta, array, ports)
    if isinstance(array, UlaConfig):
        W = dft_codebook(array)
        if ports is not None:
            W = W[:, np.asarray(ports)]
        a = ula_response_vector(theta, array)
        g = np.sqrt(array.element.gain(theta))
        return W.conj().T @ (a * g)
    raise TypeError(f"unsupported array type {type(array).__name__}")


def port_orientation_rank(array) -> np.ndarray:
    """Tie-break key per port: distance of the port's look direction from boresight."""
    if isinstance(array, RaaConfig):
        return np.abs(array.index_set).astype(float)
    return np.abs(array.codeword_sines)
