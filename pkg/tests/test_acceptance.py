"""Acceptance criteria A1-A12 at their stated tolerances.

Each test prints one ``A<n> PASS|FAIL`` line (visible even under output
capture) before asserting.
"""

from math import comb

import numpy as np
import pytest

from nctorus import symbols as S
from nctorus.algebra import LatticeBox, NcElement, ThetaMatrix, delta, mul, phase, trace
from nctorus.calculus import sharp, star
from nctorus.experiments import (ExperimentConfig, exp_parametrix_study, exp_phi_check,
                                 interior_error, kdk_symbol, random_differential_symbol,
                                 random_element)
from nctorus.geometry import PseudoCone, hol_d_fit, loglog_fit
from nctorus.powers import (abs_value, group_property_check, power_contour, power_spectral,
                            power_symbol)
from nctorus.quantization import adjoint_op, quantize, schatten_tail
from nctorus.resolvent import (exact_resolvent, minimal_growth_check, resolvent_vs_parametrix,
                               trace_chain)

THETAS = [0.0, 0.25, 1 / np.sqrt(2)]


@pytest.fixture
def report(capsys):
    def emit(name, ok, detail):
        with capsys.disabled():
            print(f"\n{name} {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, f"{name}: {detail}"
    return emit


def _pairs(count=20, seed=11):
    rng = np.random.default_rng(seed)
    for angle in THETAS:
        th = ThetaMatrix.from_angle(angle)
        for _ in range(count):
            yield th, random_differential_symbol(th, rng), random_differential_symbol(th, rng)


def test_A1_composition(report):
    worst = 0.0
    for th, r1, r2 in _pairs():
        A, B = quantize(r1, 8), quantize(r2, 8)
        worst = max(worst, interior_error(A.matrix @ B.matrix, quantize(sharp(r1, r2), 8).matrix,
                                          8, 6, 2))
    report("A1", worst <= 1e-10, f"max interior error {worst:.3g}")


def test_A2_adjoint(report):
    worst = 0.0
    for th, r1, _ in _pairs():
        A = quantize(r1, 8)
        worst = max(worst, interior_error(adjoint_op(A).matrix, quantize(star(r1), 8).matrix,
                                          8, 6, 2))
    report("A2", worst <= 1e-10, f"max interior error {worst:.3g}")


def test_A3_isospectral(report):
    pts = LatticeBox(2, 6).points.astype(float)
    oracle = np.sort(np.sum(pts ** 2, axis=1))
    worst = 0.0
    for angle in THETAS:
        ev = quantize(S.laplacian_symbol(ThetaMatrix.from_angle(angle)), 6).eigenvalues()
        worst = max(worst, float(np.max(np.abs(np.sort(ev.real) - oracle))),
                    float(np.max(np.abs(ev.imag))))
    report("A3", worst <= 1e-10, f"max eigenvalue error {worst:.3g}")


def test_A4_parametrix(report):
    th = ThetaMatrix.from_angle(0.25)
    rep = resolvent_vs_parametrix(S.laplacian_symbol(th), 0, -np.geomspace(1, 1e4, 10), 10)
    lap = max(rep.differences)
    cfg = ExperimentConfig("parametrix-study", 0.25, 10, operator={"kdk": {"h": 0.2}},
                           params={"J": [0, 3], "lambdas": [-100.0]})
    _, summary, _ = exp_parametrix_study(cfg)
    ratio = summary["median_ratio"]
    ok = lap <= 1e-10 and len(rep.differences) == 10 and ratio >= 5
    report("A4", ok, f"Delta max difference {lap:.3g}; kDk residual ratio J0/J3 {ratio:.3g}")


def test_A5_minimal_growth(report):
    th = ThetaMatrix.from_angle(0.25)
    exps = []
    for sym in (S.laplacian_symbol(th, 1.0), kdk_symbol(th, 0.2, 1.0)):
        T = quantize(sym, 8)
        for ray in (np.pi, 3 * np.pi / 4, np.pi / 2):
            exps.append(minimal_growth_check(T, ray).exponent)
    ok = all(abs(e + 1) <= 0.05 for e in exps)
    report("A5", ok, "exponents " + ", ".join(f"{e:.4f}" for e in exps))


def test_A6_hol_minus_one(report):
    th = ThetaMatrix.from_angle(0.25)
    rho = kdk_symbol(th, 0.2).principal().expr
    res = S.inverse(S.sub(rho, S.lam()))
    cone = PseudoCone([(np.pi / 2, 3 * np.pi / 2)])
    exps = []
    # |lambda| range in units of |xi|^w: rho_w is homogeneous, so this is the same window
    for x in S.sphere_samples(2, 5, seed=4) * np.array([[1.0], [0.5], [2.0], [1.5], [3.0]]):
        s = float(x @ x)
        fit = hol_d_fit(lambda l: S.evaluate(res, x, l, theta=th), cone,
                        [3 * np.pi / 4, np.pi, 5 * np.pi / 4], (10.0 * s, 1e4 * s), samples=12)
        exps.append(fit.exponent)
    ok = all(abs(e + 1) <= 0.05 for e in exps)
    report("A6", ok, "exponents " + ", ".join(f"{e:.4f}" for e in exps))


def test_A7_schatten(report):
    th = ThetaMatrix.from_angle(0.25)
    R = exact_resolvent(quantize(S.laplacian_symbol(th, 1.0), 14), -1.0)
    fit = schatten_tail(R, q=1.0)
    report("A7", abs(fit.exponent + 1) <= 0.1, f"middle-decade slope {fit.exponent:.4f}")


def shell_error(A, B, N, margin=0):
    """Operator norm of A - B on modes N/2 < |k|_inf <= N - margin."""
    r = np.abs(LatticeBox(2, N).points).max(axis=1)
    m = (r > N / 2) & (r <= N - margin)
    return float(np.linalg.norm((A - B)[np.ix_(m, m)], 2))


def test_A8_complex_powers(report):
    th = ThetaMatrix.from_angle(0.25)
    sym = S.laplacian_symbol(th, 1.0)
    T6, T12 = quantize(sym, 6), quantize(sym, 12)
    lines, ok = [], True
    for z in (-0.5, -1.0, 0.5 + 0.3j):
        spec6 = power_spectral(T6, z)
        d = float(np.max(np.abs(power_contour(T6, z).matrix - spec6.matrix)))
        ps = power_symbol(sym, z, J=4)
        e6 = shell_error(quantize(ps, 6).matrix, spec6.matrix, 6)
        e12 = shell_error(quantize(ps, 12).matrix, power_spectral(T12, z).matrix, 12)
        worst = 0.0
        rng = np.random.default_rng(2)
        for x in S.sphere_samples(2, 10, seed=1) * rng.uniform(0.5, 4, (10, 1)):
            v = ps.components[0].expr.fn(x)
            worst = max(worst, abs(v - (x @ x) ** z))
        ok &= d <= 1e-6 and e12 <= e6 / 2 and worst <= 1e-6
        lines.append(f"z={z}: contour {d:.2g}, shell {e6:.2g}->{e12:.2g}, principal {worst:.2g}")
    report("A8", ok, "; ".join(lines))


def test_A9_group_and_abs(report):
    th = ThetaMatrix.from_angle(0.25)
    T = quantize(S.laplacian_symbol(th, 1.0), 6)
    rng = np.random.default_rng(5)
    dev = max(group_property_check(T, complex(*rng.uniform(-1, 1, 2)),
                                   complex(*rng.uniform(-1, 1, 2))) for _ in range(5))
    U1, U2 = NcElement.generator(th, 1), NcElement.generator(th, 2)
    c = 1 + 0.1j
    P = S.differential_symbol(th, {(2, 0): c, (0, 2): c, (1, 0): 0.3 * U2, (0, 0): 0.5 * U1})
    TP = quantize(P, 6)
    A, _ = abs_value(TP)
    sq = float(np.linalg.norm(A.matrix @ A.matrix - TP.matrix.conj().T @ TP.matrix, 2))
    report("A9", dev <= 1e-8 and sq <= 1e-8, f"group deviation {dev:.3g}; |P|^2 defect {sq:.3g}")


def test_A10_trace_chain(report):
    th = ThetaMatrix.from_angle(0.25)
    T = quantize(S.laplacian_symbol(th, 1.0), 8)
    ts = np.geomspace(10, 1e4, 16)
    fit = trace_chain([None] * 3, [0.0] * 3, T, 2.0, -ts)
    k2 = np.sum(T.box.points.astype(float) ** 2, axis=1)
    oracle = loglog_fit(ts, [np.sum((1 + k2 + t) ** -2.0) for t in ts]).exponent
    ok = fit.exponent <= -0.9 and abs(fit.exponent - oracle) <= 0.1
    report("A10", ok, f"exponent {fit.exponent:.4f}, diagonal-sum oracle {oracle:.4f}")


def test_A11_phi(report):
    _, s, ok = exp_phi_check(ExperimentConfig("phi-check", 0.25, 4, seed=1))
    report("A11", ok, ", ".join(f"{k} {v:.3g}" for k, v in s.items()))


def test_A12_algebra_laws(report):
    rng = np.random.default_rng(12)
    worst = {"associativity": 0.0, "trace": 0.0, "leibniz": 0.0, "cocycle": 0.0}
    for i in range(1000):
        th = ThetaMatrix.from_angle(THETAS[i % 3])
        a, b, c = (random_element(th, rng, 3, 4) for _ in range(3))
        worst["associativity"] = max(worst["associativity"],
                                     (mul(mul(a, b), c) - mul(a, mul(b, c))).norm0())
        worst["trace"] = max(worst["trace"], abs(trace(mul(a, b)) - trace(mul(b, a))))
        al = tuple(int(x) for x in rng.integers(0, 3, 2))
        lhs = delta(al, mul(a, b))
        rhs = NcElement(th)
        for g1 in range(al[0] + 1):
            for g2 in range(al[1] + 1):
                rhs = rhs + mul(delta((g1, g2), a), delta((al[0] - g1, al[1] - g2), b)).scale(
                    comb(al[0], g1) * comb(al[1], g2))
        worst["leibniz"] = max(worst["leibniz"], (lhs - rhs).norm0() / max(1.0, lhs.norm0()))
        k, l, m = (rng.integers(-5, 6, 2) for _ in range(3))
        worst["cocycle"] = max(worst["cocycle"], abs(phase(th, k, l) * phase(th, k + l, m)
                                                     - phase(th, l, m) * phase(th, k, l + m)))
    ok = all(v <= 1e-12 for v in worst.values())
    report("A12", ok, ", ".join(f"{k} {v:.2g}" for k, v in worst.items()))
