import numpy as np
import pytest

from nctorus import symbols as S
from nctorus.algebra import ThetaMatrix
from nctorus.errors import DomainError, NearSpectrumError, ValidationError
from nctorus.experiments import kdk_symbol
from nctorus.geometry import PseudoCone
from nctorus.quantization import quantize
from nctorus.resolvent import (exact_resolvent, minimal_growth_check, parametrix_residual,
                               resolvent_norm, resolvent_vs_parametrix, spectrum, trace_chain)

TH = ThetaMatrix.from_angle(0.25)


@pytest.fixture(scope="module")
def lap1():
    return quantize(S.laplacian_symbol(TH, 1.0), 6)


@pytest.fixture(scope="module")
def kdk():
    return kdk_symbol(TH, 0.2)


def test_spectrum_of_laplacian():
    sp = spectrum(quantize(S.laplacian_symbol(TH), 2))
    k2 = sorted(float(a * a + b * b) for a in range(-2, 3) for b in range(-2, 3))
    assert np.allclose(sp.values.real, k2, atol=1e-12)
    assert sp.clusters[0] == (0, 1) and sp.clusters[1][1] == 4
    sp1 = spectrum(quantize(S.laplacian_symbol(TH, 1.0), 2))
    assert np.allclose(sp1.values.real, np.array(k2) + 1, atol=1e-12)


def test_kdk_spectrum_real_nonnegative(kdk):
    ev = quantize(kdk, 5).eigenvalues()
    assert np.max(np.abs(ev.imag)) < 1e-8 and ev.real.min() > -1e-8


def test_exact_resolvent_examples():
    T = quantize(S.laplacian_symbol(TH), 4)
    R = exact_resolvent(T, -1.0)
    k2 = np.sum(T.box.points.astype(float) ** 2, axis=1)
    assert np.allclose(R.matrix, np.diag(1 / (k2 + 1)), atol=1e-14)
    assert np.allclose((T.matrix + np.eye(T.size)) @ R.matrix, np.eye(T.size), atol=1e-10)
    lam = -5 + 3j
    assert resolvent_norm(T, lam) <= 1 / np.min(np.abs(k2 - lam)) + 1e-12
    with pytest.raises(NearSpectrumError):
        exact_resolvent(T, 2.0)


def test_minimal_growth_examples(lap1):
    assert minimal_growth_check(lap1, np.pi).passed
    assert minimal_growth_check(lap1, np.pi / 2).passed
    with pytest.raises(DomainError):
        minimal_growth_check(lap1, 0.0)
    with pytest.raises(DomainError):
        minimal_growth_check(lap1, 0.3, theta_cone=PseudoCone([(np.pi / 2, 3 * np.pi / 2)]))


def test_parametrix_exact_for_laplacian():
    for J in (0, 2):
        assert parametrix_residual(S.laplacian_symbol(TH), J, -10.0, 6) <= 1e-10


def test_parametrix_improves_for_kdk(kdk):
    r0 = parametrix_residual(kdk, 0, -50.0, 8, margin=6)
    r3 = parametrix_residual(kdk, 3, -50.0, 8, margin=6)
    assert r3 < r0


def test_parametrix_domain_refusal():
    cone = PseudoCone([(0.1, 2 * np.pi - 0.1)], disk_radius=1.0, include_origin=False)
    with pytest.raises(DomainError):
        parametrix_residual(S.laplacian_symbol(TH), 0, 0.0, 4, domain=cone)


def test_resolvent_vs_parametrix_laplacian():
    rep = resolvent_vs_parametrix(S.laplacian_symbol(TH), 0, [-1, -10, -100, 4.0, -1000], 6)
    assert max(rep.differences) <= 1e-10
    assert 4.0 in rep.excluded
    assert len(rep.rows()) == 4


def test_resolvent_vs_parametrix_kdk_decay(kdk):
    lams = -np.geomspace(10, 1e3, 6)
    rep = resolvent_vs_parametrix(kdk, 1, lams, 8, margin=5)
    assert rep.fit.exponent <= -1


def test_trace_chain_examples(lap1):
    lams = -np.geomspace(10, 1e4, 12)
    fit = trace_chain([None, None, None], [0, 0, 0], lap1, 2.0, lams)
    assert fit.passed
    k2 = np.sum(lap1.box.points.astype(float) ** 2, axis=1)
    oracle = [np.sum((1 + k2 - l) ** -2.0) for l in lams]
    assert np.allclose(fit.per_ray["traces"], oracle, rtol=1e-10)
    B = quantize(S.bracket_symbol(TH, -4), 6)
    fit = trace_chain([B, None], [-4, 0], lap1, 2.0, lams)
    assert fit.exponent <= -1 + 0.1
    with pytest.raises(ValidationError):
        trace_chain([None, None], [0, 0], lap1, 2.0, lams)
