"""Beam patterns and angular resolution of RAA versus ULA."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .array_model import RaaConfig, UlaConfig, dirichlet_kernel


class ResolutionError(ValueError):
    pass


@dataclass(frozen=True)
class ResolutionReport:
    desired: float
    left_null: float
    right_null: float

    @property
    def mainlobe_width(self) -> float:
        return self.right_null - self.left_null

    @property
    def resolution(self) -> float:
        return 0.5 * self.mainlobe_width


def raa_beam_pattern(theta, theta_p, cfg: RaaConfig):
    """``M sqrt(G(theta - theta')) |H_M(sin(theta - theta'))|``."""
    zeta = np.asarray(theta, dtype=float) - theta_p
    return cfg.M * np.sqrt(cfg.element.gain(zeta)) * np.abs(dirichlet_kernel(np.sin(zeta), cfg.M))


def ula_beam_pattern(theta, theta_p, cfg: UlaConfig):
    """``M sqrt(G_ULA(theta)) |H_M(sin theta - sin theta')|`` (MRT towards ``theta'``)."""
    theta = np.asarray(theta, dtype=float)
    x = np.sin(theta) - np.sin(theta_p)
    return cfg.M * np.sqrt(cfg.element.gain(theta)) * np.abs(dirichlet_kernel(x, cfg.M))


def _signed_kernel(x, M):
    """Real Dirichlet ratio ``sin(pi M x / 2) / (M sin(pi x / 2))``; changes sign at each null."""
    x = np.asarray(x, dtype=float)
    s = np.sin(np.pi * x / 2)
    return np.where(np.abs(s) < 1e-12, 1.0, np.sin(np.pi * M * x / 2) / np.where(np.abs(s) < 1e-12, 1.0, M * s))


def _first_null(arg_fn, M, theta_p, direction, limit, step):
    """Bisect the first sign change of the kernel ratio away from ``theta_p``."""
    f = lambda t: float(_signed_kernel(arg_fn(t), M))
    a = theta_p
    while True:
        b = a + direction * step
        if direction * (b - limit) > 0:
            b = limit
        if abs(f(b)) < 1e-13:
            return b
        if f(a) * f(b) < 0:
            lo, hi = sorted((a, b))
            return brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
        if b == limit:
            raise ResolutionError("no null on the searched side of theta'")
        a = b


def resolution_numeric(pattern, theta_p: float, M: int, kernel_arg, step=None,
                       null_tol: float = 1e-9) -> ResolutionReport:
    """Null-to-null resolution of ``pattern`` around ``theta_p``.

    ``kernel_arg(theta)`` is the Dirichlet argument of the pattern (e.g.
    ``sin(theta - theta')`` for the RAA); its nulls are located by
    bracketed root finding and then confirmed on the full ``pattern``.
    """
    if step is None:
        step = 0.25 / M
    lim_hi, lim_lo = np.pi / 2, -np.pi / 2
    right = _first_null(kernel_arg, M, theta_p, +1, lim_hi, step)
    left = _first_null(kernel_arg, M, theta_p, -1, lim_lo, step)
    peak = float(pattern(theta_p))
    for null in (left, right):
        if float(pattern(null)) > null_tol * peak:
            raise ResolutionError(f"pattern at located null {null:.6g} is not below {null_tol:g} of peak")
    return ResolutionReport(theta_p, left, right)


def raa_resolution(cfg: RaaConfig, theta_p: float) -> ResolutionReport:
    return resolution_numeric(lambda t: raa_beam_pattern(t, theta_p, cfg), theta_p, cfg.M,
                              lambda t: np.sin(t - theta_p))


def ula_resolution(cfg: UlaConfig, theta_p: float) -> ResolutionReport:
    return resolution_numeric(lambda t: ula_beam_pattern(t, theta_p, cfg), theta_p, cfg.M,
                              lambda t: np.sin(t) - np.sin(theta_p))


def gamma_raa(M: int) -> float:
    if M < 2:
        raise ValueError("M must be >= 2")
    return float(np.arcsin(2.0 / M))


def gamma_ula(M: int, theta_p):
    """Closed-form ULA resolution; valid for ``-1 + 2/M <= sin theta' <= 1 - 2/M``."""
    if M < 2:
        raise ValueError("M must be >= 2")
    s = np.sin(np.asarray(theta_p, dtype=float))
    bound = 1 - 2.0 / M
    if np.any(np.abs(s) > bound + 1e-15):
        raise ResolutionError(f"sin(theta') must lie in [{-bound:.6g}, {bound:.6g}] for M={M}")
    s = np.clip(s, -bound, bound)
    out = 0.5 * np.arcsin(np.minimum(s + 2.0 / M, 1.0)) - 0.5 * np.arcsin(np.maximum(s - 2.0 / M, -1.0))
    return out if out.ndim else float(out)


def ula_domain(M: int) -> float:
    """Largest ``|theta'|`` inside the closed-form ULA domain."""
    return float(np.arcsin(1 - 2.0 / M))


def default_theta_grid(M: int, step_deg: float = 0.5) -> np.ndarray:
    """0.5-degree grid over the ULA domain (symmetric, includes 0)."""
    lim = np.rad2deg(ula_domain(M))
    k = int(np.floor(lim / step_deg + 1e-9))
    return np.deg2rad(np.arange(-k, k + 1) * step_deg)


def resolution_dominance_check(M: int, theta_grid=None, tol: float = 1e-12):
    """Return ``(ok, margins)`` with ``margins = gamma_ula - gamma_raa`` per grid point.

    ``ok`` requires every margin to be non-negative and only the
    ``theta' = 0`` point to be within ``tol`` of zero.
    """
    if theta_grid is None:
        theta_grid = default_theta_grid(M)
    theta_grid = np.asarray(theta_grid, dtype=float)
    margins = np.asarray(gamma_ula(M, theta_grid)) - gamma_raa(M)
    at_zero = theta_grid == 0
    ok = bool(np.all(margins >= -tol) and np.all(np.abs(margins[at_zero]) < tol)
              and np.all(margins[~at_zero] > tol))
    return ok, margins


def gamma_ula_of_sine(M: int, x):
    x = np.asarray(x, dtype=float)
    return 0.5 * np.arcsin(x + 2.0 / M) - 0.5 * np.arcsin(x - 2.0 / M)


def convexity_derivatives(M: int, x, h: float = 1e-5):
    """Central first and second differences of ``gamma_ula(arcsin x)`` in ``x``."""
    x = np.asarray(x, dtype=float)
    f0, fp, fm = gamma_ula_of_sine(M, x), gamma_ula_of_sine(M, x + h), gamma_ula_of_sine(M, x - h)
    return (fp - fm) / (2 * h), (fp - 2 * f0 + fm) / h ** 2


def appendix_convexity_check(M: int, x_grid=None, h: float = 1e-5) -> bool:
    """Second difference positive everywhere, first difference changing sign only at 0."""
    if x_grid is None:
        bound = 1 - 2.0 / M
        x_grid = np.linspace(-bound, bound, 201)[1:-1]
    x_grid = np.asarray(x_grid, dtype=float)
    d1, d2 = convexity_derivatives(M, x_grid, h)
    # points within one step of 0 carry a rounding-level first difference
    sign_ok = np.all(d1[x_grid > h] > 0) and np.all(d1[x_grid < -h] < 0)
    return bool(np.all(d2 > 0) and sign_ok)


def closed_form_first_derivative(M: int, x):
    """``4x / (M Delta)`` with ``Delta = sqrt(1-u^2) sqrt(1-v^2) (sqrt(1-v^2) + sqrt(1-u^2))``."""
    x = np.asarray(x, dtype=float)
    u, v = x + 2.0 / M, x - 2.0 / M
    su, sv = np.sqrt(1 - u ** 2), np.sqrt(1 - v ** 2)
    return 4 * x / (M * su * sv * (su + sv))
