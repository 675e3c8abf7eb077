import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cuspwave import _kbessel
from cuspwave.special import (EnvelopeError, PoleError, PrecisionPolicy, bessel_k_imag_order,
                              bessel_k_imag_order_scaled, gamma_complex, loggamma, xi_completed,
                              zeta)

# frozen oracle values (mpmath, 40 digits)
ZETA_1_10I = complex(1.390287313237401426796005098292061847767, -0.1097851530663020569097459799716357238594)
K0_1 = 0.42102443824070833334
K_5I_50 = 2.661824885154225464807632514297076797051e-23
K_3I_5 = 0.00158910290503146985989852495225
K_20I_30 = 2.33676894722593428893280054121e-17
K_50I_20 = 2.74079028298716985255307470765e-35


def test_policy_validation():
    with pytest.raises(ValueError):
        PrecisionPolicy(rel_tol=0.0)
    with pytest.raises(ValueError):
        PrecisionPolicy(max_terms=0)


def test_gamma_classical_values():
    assert gamma_complex(1.0) == pytest.approx(1.0, rel=1e-14)
    assert gamma_complex(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert gamma_complex(5.0) == pytest.approx(24.0, rel=1e-13)


@pytest.mark.parametrize("x", [1.0, 10.0, 50.0])
def test_gamma_reflection_identity(x):
    # |Gamma(ix)|^2 = pi / (x sinh(pi x)), compared in logs to avoid underflow
    lhs = 2 * loggamma(1j * x).real
    rhs = math.log(math.pi) - math.log(x) - (math.pi * x + math.log1p(-math.exp(-2 * math.pi * x)) - math.log(2))
    assert lhs == pytest.approx(rhs, abs=1e-12 * max(1, abs(rhs)))


def test_gamma_errors():
    with pytest.raises(PoleError):
        gamma_complex(0.0)
    with pytest.raises(PoleError):
        gamma_complex(-3.0)
    with pytest.raises(OverflowError):
        gamma_complex(200.0)


def test_gamma_recurrence_random_grid():
    rng = np.random.default_rng(0)
    z = rng.uniform(-4, 6, 100) + 1j * rng.uniform(-40, 40, 100)
    lhs = loggamma(z + 1)
    rhs = loggamma(z) + np.log(z)
    d = np.angle(np.exp(1j * (lhs - rhs).imag))
    assert np.all(np.abs((lhs - rhs).real) < 1e-11)
    assert np.all(np.abs(d) < 1e-11)


def test_gamma_against_mpmath():
    mp.mp.dps = 30
    for z in (0.3 + 7j, -2.5 + 0.1j, 3 - 40j, 0.25 + 250j):
        ref = complex(mp.loggamma(z))
        val = complex(loggamma(z))
        assert val.real == pytest.approx(ref.real, abs=1e-10 * max(1, abs(ref.real)))
        assert abs(np.angle(np.exp(1j * (val.imag - ref.imag)))) < 1e-10 * max(1, abs(ref.imag))


def test_zeta_values():
    assert zeta(2.0) == pytest.approx(math.pi ** 2 / 6, rel=1e-14)
    assert zeta(0.0) == pytest.approx(-0.5, rel=1e-14)
    assert zeta(-2.0) == 0
    assert zeta(1 + 10j) == pytest.approx(ZETA_1_10I, rel=1e-12)
    with pytest.raises(PoleError):
        zeta(1.0)


def test_zeta_conjugation_exact():
    for s in (0.5 + 14.1j, 1 + 200j, -1.5 + 3j, 2.5 - 480j):
        assert zeta(np.conj(s)) == np.conj(zeta(s))


def test_zeta_against_mpmath_grid():
    mp.mp.dps = 30
    for s in (0.5 + 14.134725141734693j, 0 + 100j, -2 + 37j, 3 + 499j, 1 + 0.001j, 0.7 - 250j):
        ref = complex(mp.zeta(s))
        assert zeta(s) == pytest.approx(ref, rel=1e-10, abs=1e-13)


def test_xi_identities():
    assert xi_completed(2.0) == pytest.approx(math.pi / 6, rel=1e-14)
    a, b = xi_completed(0.5 + 5j), xi_completed(0.5 - 5j)
    assert a == pytest.approx(np.conj(b), rel=1e-13)
    assert xi_completed(0.3 + 7j) == pytest.approx(xi_completed(0.7 - 7j), rel=1e-10)
    with pytest.raises(PoleError):
        xi_completed(1.0)
    with pytest.raises(PoleError):
        xi_completed(1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(-1.5, 2.5), st.floats(0.5, 300))
def test_xi_functional_equation(sigma, t):
    s = complex(sigma, t)
    assert abs(xi_completed(s) - xi_completed(1 - s)) <= 1e-9 * abs(xi_completed(s))


def test_k_bessel_values():
    assert bessel_k_imag_order(0.0, 1.0) == pytest.approx(K0_1, rel=1e-12)
    assert bessel_k_imag_order(5.0, 50.0) == pytest.approx(K_5I_50, rel=1e-10)
    asym = math.sqrt(math.pi / 100.0) * math.exp(-50.0)
    assert bessel_k_imag_order(5.0, 50.0) == pytest.approx(asym, rel=0.03)
    assert bessel_k_imag_order(3.0, 5.0) == pytest.approx(K_3I_5, rel=1e-10)
    assert bessel_k_imag_order(20.0, 30.0) == pytest.approx(K_20I_30, rel=1e-9)
    # oscillatory regime: error measured against the envelope (r^2 - x^2)^{-1/4}
    env = (50.0 ** 2 - 20.0 ** 2) ** -0.25
    assert abs(bessel_k_imag_order_scaled(50.0, 20.0) - K_50I_20 * math.exp(25 * math.pi)) < 1e-9 * env


@pytest.mark.parametrize("r,x", [(3.0, 5.0), (20.0, 30.0)])
def test_k_bessel_order_symmetry(r, x):
    assert bessel_k_imag_order(-r, x) == bessel_k_imag_order(r, x)


def test_k_bessel_envelope_errors():
    with pytest.raises(EnvelopeError):
        bessel_k_imag_order(1.0, 0.4)
    with pytest.raises(EnvelopeError):
        bessel_k_imag_order(501.0, 10.0)


def test_k_bessel_grid_against_mpmath():
    mp.mp.dps = 25
    rs = np.linspace(0.0, 240.0, 20)
    xs = np.geomspace(0.5, 260.0, 20)
    worst = 0.0
    for r in rs:
        for x in xs:
            ref = float(mp.re(mp.besselk(1j * r, x) * mp.exp(mp.pi * r / 2)))
            env = abs(ref) if x > r + 2 * max(r, 1) ** (1 / 3) else max(1.0, abs(r * r - x * x)) ** -0.25
            val = float(bessel_k_imag_order_scaled(r, x))
            worst = max(worst, abs(val - ref) / max(env, 1e-300))
    assert worst < 1e-8


def test_k_bessel_transition_region():
    mp.mp.dps = 25
    for r in (30.0, 100.0, 230.0):
        for x in (r - 1.0, r, r + 1.0):
            ref = float(mp.re(mp.besselk(1j * r, x) * mp.exp(mp.pi * r / 2)))
            assert abs(float(bessel_k_imag_order_scaled(r, x)) - ref) < 1e-10 * r ** (-1 / 3) * 10


def test_node_rule_refinement_consistent():
    a = np.array([5.0, 50.0, 120.0])
    x = np.array([10.0, 49.0, 30.0])
    default = _kbessel.k_scaled_array(a, x)
    fine = _kbessel.k_scaled_array(a, x, *_kbessel.node_rule(20, (1.0, 2.2, 3.6, 5.0, 6.5)))
    assert np.allclose(default, fine, rtol=0, atol=1e-10)
