import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raa_isac.array_model import (ISOTROPIC_ELEMENT, RAA_ELEMENT, ULA_ELEMENT, ElementPattern, RaaConfig,
                                  UlaConfig, design_orientations, dft_codebook, dirichlet_kernel,
                                  element_gain, min_base_offset, port_response, raa_response_vector,
                                  sula_ref_response, sula_response, total_power_gain, ula_response_vector)

angles = st.floats(min_value=-np.pi / 2, max_value=np.pi / 2, allow_nan=False)


# element pattern

def test_element_peak_gain():
    assert element_gain(0.0, RAA_ELEMENT) == pytest.approx(10 ** 0.51335, rel=1e-12)
    assert element_gain(0.0, RAA_ELEMENT) == pytest.approx(3.263, abs=3e-3)


def test_element_gain_at_beamwidth_parameter():
    el = ElementPattern(0.0, 0.3 * np.pi)
    assert element_gain(0.3 * np.pi, el) == pytest.approx(10 ** -1.2, rel=1e-12)


def test_element_gain_clamps_at_front_to_back():
    el = ElementPattern(0.0, 0.3 * np.pi)
    assert element_gain(np.pi, el) == pytest.approx(1e-3, rel=1e-12)
    assert element_gain(-np.pi, el) == pytest.approx(1e-3, rel=1e-12)


@given(st.floats(min_value=-10, max_value=10, allow_nan=False))
def test_element_gain_is_even_and_periodic(theta):
    g = RAA_ELEMENT.gain
    assert g(theta) == pytest.approx(g(-theta), rel=1e-9)
    assert g(theta) == pytest.approx(g(theta + 2 * np.pi), rel=1e-9)


def test_isotropic_total_gain_closed_form():
    assert total_power_gain(ElementPattern(0.0, kind="isotropic")) == pytest.approx(2 * np.pi)
    assert total_power_gain(ISOTROPIC_ELEMENT) == pytest.approx(2 * np.pi * 10 ** -0.2816)


def _trapezoid_total(el, n=400_001):
    theta = np.linspace(-np.pi, np.pi, n)
    g = el.gain(theta)
    return float(np.sum((g[1:] + g[:-1]) / 2) * (theta[1] - theta[0]))


@pytest.mark.parametrize("el", [RAA_ELEMENT, ULA_ELEMENT, ElementPattern(3.0, 0.2)])
def test_total_gain_matches_dense_rule(el):
    assert total_power_gain(el) == pytest.approx(_trapezoid_total(el), rel=1e-8)


def test_directional_and_isotropic_presets_carry_equal_total_gain():
    # the RAA element pairs with the -2.816 dB isotropic element (and with the 0 dB, pi-wide 3GPP one)
    raa = total_power_gain(RAA_ELEMENT)
    assert total_power_gain(ISOTROPIC_ELEMENT) == pytest.approx(raa, rel=5e-3)
    assert total_power_gain(ULA_ELEMENT) == pytest.approx(raa, rel=5e-3)


def test_unknown_element_kind_rejected():
    with pytest.raises(ValueError):
        ElementPattern(0.0, kind="dipole")


# Dirichlet kernel

def test_kernel_at_zero():
    for M in (1, 2, 8, 128):
        assert dirichlet_kernel(0.0, M) == pytest.approx(1.0)


def test_kernel_first_null():
    assert abs(dirichlet_kernel(2 / 8, 8)) < 1e-15


def test_kernel_half_null_value():
    assert abs(dirichlet_kernel(1 / 8, 8)) == pytest.approx(abs(np.sin(np.pi / 2) / (8 * np.sin(np.pi / 16))), rel=1e-12)
    assert abs(dirichlet_kernel(1 / 8, 8)) == pytest.approx(0.6407, abs=1e-4)


@given(st.floats(min_value=-1.99, max_value=1.99, allow_nan=False), st.integers(min_value=1, max_value=64))
def test_kernel_equals_phasor_sum(x, M):
    ref = np.sum(np.exp(1j * np.pi * np.arange(M) * x)) / M
    assert dirichlet_kernel(x, M) == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("M", [3, 4, 7, 8])
@pytest.mark.parametrize("k", [-1, 1, 2])
def test_kernel_limit_at_even_integers(M, k):
    x = 2.0 * k
    ref = np.sum(np.exp(1j * np.pi * np.arange(M) * x)) / M
    assert dirichlet_kernel(x, M) == pytest.approx(ref, abs=1e-12)
    assert abs(dirichlet_kernel(x, M)) == pytest.approx(1.0)


# orientation design and base offset

def test_design_m128_gives_201():
    N, eta = design_orientations(128)
    assert N == 201 and eta.size == 201


def test_design_large_m_approx():
    for M in (256, 512, 1024):
        N, _ = design_orientations(M)
        assert abs(N - np.floor(np.pi * M / 2)) <= 3


def test_design_m8_symmetric_with_step():
    N, eta = design_orientations(8)
    assert N % 2 == 1
    assert np.allclose(eta, -eta[::-1], atol=0)
    assert np.allclose(np.diff(eta), np.arcsin(0.25))
    assert np.arcsin(0.25) == pytest.approx(0.2527, abs=1e-4)
    assert np.max(np.abs(eta)) <= np.pi / 2


@given(st.integers(min_value=2, max_value=400), st.floats(min_value=0.05, max_value=np.pi / 2))
def test_design_invariants(M, eta_max):
    N, eta = design_orientations(M, eta_max)
    assert N % 2 == 1 and N == eta.size
    assert eta[(N - 1) // 2] == 0
    assert np.max(np.abs(eta)) <= eta_max + 1e-12


def test_min_base_offset_values():
    lam = 1.0
    assert min_base_offset(2, lam) == pytest.approx(lam / (2 * np.sqrt(2)))
    assert min_base_offset(128, lam) == pytest.approx(lam / (4 * np.sin(0.5 * np.arcsin(1 / 64))))


@given(st.integers(min_value=3, max_value=2048))
def test_min_base_offset_exceeds_half_wavelength(M):
    assert min_base_offset(M, 1.0) >= 0.5


def test_min_base_offset_two_element_case_is_below_half_wavelength():
    # M = 2 fans the sULAs 90 degrees apart, so a shorter offset already suffices
    assert min_base_offset(2, 1.0) < 0.5


def test_min_base_offset_keeps_adjacent_sulas_apart():
    # first elements of neighbouring sULAs sit on a circle of radius D
    M, lam = 16, 1.0
    D = min_base_offset(M, lam)
    chord = 2 * D * np.sin(0.5 * np.arcsin(2 / M))
    assert chord == pytest.approx(lam / 2)


def test_raa_config_rejects_bad_offset_and_parity():
    cfg = RaaConfig.design(8)
    with pytest.raises(ValueError):
        RaaConfig(8, cfg.orientations, cfg.D * 0.5, cfg.wavelength)
    with pytest.raises(ValueError):
        RaaConfig(8, cfg.orientations[1:], cfg.D, cfg.wavelength)
    with pytest.raises(ValueError):
        RaaConfig.design(8, N=15)


# responses

def test_ref_response_boresight_and_quarter_wave():
    cfg = RaaConfig.design(8)
    assert sula_ref_response(0.0, cfg) == pytest.approx(np.sqrt(RAA_ELEMENT.gain(0.0)))
    # D = lambda/4 is below the spacing bound, so use lambda/4 + 2 lambda (same phase mod 2 pi)
    d_cfg = RaaConfig(8, cfg.orientations, cfg.wavelength * 2.25, cfg.wavelength)
    v = sula_ref_response(np.pi / 2, d_cfg)
    assert np.angle(v) == pytest.approx(np.pi / 2, abs=1e-9)
    assert abs(v) == pytest.approx(np.sqrt(RAA_ELEMENT.gain(np.pi / 2)))


def test_ref_response_scalar_oracle_m128():
    cfg = RaaConfig.design(128)
    zeta = 0.1
    g_db = 5.1335 - min(12 * (zeta / (0.3 * np.pi)) ** 2, 30)
    ref = np.exp(1j * 2 * np.pi * cfg.D * np.sin(zeta) / cfg.wavelength) * np.sqrt(10 ** (g_db / 10))
    assert sula_ref_response(zeta, cfg) == pytest.approx(ref, rel=1e-12)


def test_sula_peak_and_null():
    cfg = RaaConfig.design(8)
    assert abs(sula_response(0.3, 0.3, cfg)) == pytest.approx(8 * np.sqrt(RAA_ELEMENT.gain(0.0)))
    assert abs(sula_response(np.arcsin(2 / 8), 0.0, cfg)) < 1e-12


def _brute_raa(theta, cfg):
    out = []
    for eta in cfg.eta:
        zeta = theta - eta
        pos = cfg.D + np.arange(cfg.M) * cfg.wavelength / 2
        out.append(np.sqrt(cfg.element.gain(zeta)) * np.sum(np.exp(1j * 2 * np.pi * pos * np.sin(zeta) / cfg.wavelength)))
    return np.array(out)


def test_sula_matches_element_sum():
    cfg = RaaConfig.design(8)
    eta = 0.0
    assert sula_response(0.05, eta, cfg) == pytest.approx(_brute_raa(0.05, cfg)[6], rel=1e-12)


@settings(max_examples=30)
@given(angles)
def test_raa_vector_matches_element_level_oracle(theta):
    cfg = RaaConfig.design(8)
    assert cfg.N == 13
    assert np.allclose(raa_response_vector(theta, cfg), _brute_raa(theta, cfg), atol=1e-11)


def test_raa_vector_boresight_peak_at_center():
    cfg = RaaConfig.design(128)
    r = np.abs(raa_response_vector(0.0, cfg))
    assert np.argmax(r) == 100


def test_raa_vector_adjacent_orthogonality():
    cfg = RaaConfig.design(128)
    peak = 128 * np.sqrt(RAA_ELEMENT.gain(0.0))
    for k in (1, 50, 100, 150, 199):
        r = np.abs(raa_response_vector(cfg.eta[k], cfg))
        assert r[k] == pytest.approx(peak)
        assert r[k - 1] < 1e-9 * peak and r[k + 1] < 1e-9 * peak


def test_raa_vector_batch_shape_and_ports():
    cfg = RaaConfig.design(8)
    theta = np.array([0.0, 0.2, -0.4])
    full = raa_response_vector(theta, cfg)
    assert full.shape == (13, 3)
    sub = raa_response_vector(theta, cfg, ports=[2, 5])
    assert np.allclose(sub, full[[2, 5]])


def test_ula_vector_values():
    cfg = UlaConfig(6)
    assert np.allclose(ula_response_vector(0.0, cfg), np.ones(6))
    assert np.allclose(ula_response_vector(np.pi / 2, cfg), (-1.0) ** np.arange(6))
    ref = np.array([np.exp(1j * np.pi * m * np.sin(0.3)) for m in range(4)])
    assert np.allclose(ula_response_vector(0.3, UlaConfig(4)), ref)


def test_dft_codebook_structure():
    W = dft_codebook(UlaConfig(4))
    ref = np.array([[np.exp(1j * np.pi * m * (-1 + 2 * n / 4)) for n in range(4)] for m in range(4)])
    assert np.allclose(W, ref)
    for M in (4, 8, 16):
        W = dft_codebook(UlaConfig(M))
        assert np.allclose(W.conj().T @ W, M * np.eye(M), atol=1e-10)
    assert UlaConfig(8).codeword_sines[0] == -1.0


def test_codebook_size_override():
    cfg = UlaConfig(8, codebook_size=16)
    assert dft_codebook(cfg).shape == (8, 16)
    assert np.allclose(np.diff(cfg.codeword_sines), 2 / 16)


def test_ula_port_response_is_codeword_combining():
    cfg = UlaConfig(8)
    theta = 0.37
    ref = dft_codebook(cfg).conj().T @ (ula_response_vector(theta, cfg) * np.sqrt(cfg.element.gain(theta)))
    assert np.allclose(port_response(theta, cfg), ref)
