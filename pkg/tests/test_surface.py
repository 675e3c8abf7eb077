import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cuspwave.surface import (VOLUME, Constant, CuspIndicator, HeightCutoff, ModularGroupElement,
                              TruncatedDomain, UpperHalfPoint, normalized_area, parse_observable,
                              reduce, reduce_array, smooth_step, surface_integral)


def in_domain(p, tol=1e-12):
    return abs(p.x) <= 0.5 + tol and p.x * p.x + p.y * p.y >= 1 - tol


def brute_force_max_height(z, bound=50):
    best = z.imag
    for c in range(0, bound + 1):
        for d in range(-bound, bound + 1):
            if math.gcd(c, d) != 1:
                continue
            best = max(best, z.imag / abs(c * z + d) ** 2)
    return best


def test_reduce_identity_at_i():
    p, g = reduce(UpperHalfPoint(0.0, 1.0))
    assert (p.x, p.y) == (0.0, 1.0)
    assert g == ModularGroupElement.identity()


def test_reduce_pure_translation():
    p, g = reduce(UpperHalfPoint(5.0, 1.0))
    assert p.x == pytest.approx(0.0) and p.y == pytest.approx(1.0)
    assert g == ModularGroupElement(1, -5, 0, 1)


def test_reduce_matches_brute_force():
    z = complex(0.13, 0.21)
    p, g = reduce(UpperHalfPoint.from_complex(z))
    assert in_domain(p)
    assert p.y == pytest.approx(brute_force_max_height(z), rel=1e-12)
    assert g.act(z) == pytest.approx(p.z, abs=1e-12)


def test_reduce_tie_breaking():
    p, _ = reduce(UpperHalfPoint(0.5, 2.0))
    assert p.x == pytest.approx(-0.5)
    w = complex(math.cos(1.2), math.sin(1.2))      # on the unit arc, x > 0
    p, _ = reduce(UpperHalfPoint.from_complex(w))
    assert p.x < 0 and abs(p.z) == pytest.approx(1.0)


def test_bad_inputs():
    with pytest.raises(ValueError):
        UpperHalfPoint(0.0, 0.0)
    with pytest.raises(ValueError):
        ModularGroupElement(1, 1, 1, 1)
    with pytest.raises(ValueError):
        TruncatedDomain(1.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(-20, 20), st.floats(1e-3, 5))
def test_reduce_idempotent_and_consistent(x, y):
    p, g = reduce(UpperHalfPoint(x, y))
    assert in_domain(p, 1e-9)
    q, h = reduce(p)
    assert q.x == pytest.approx(p.x, abs=1e-9) and q.y == pytest.approx(p.y, rel=1e-9)
    assert g.act(complex(x, y)) == pytest.approx(p.z, rel=1e-9, abs=1e-9)


def test_reduce_idempotent_1000_random():
    rng = np.random.default_rng(1)
    x = rng.uniform(-3, 3, 1000)
    y = rng.uniform(0.01, 3, 1000)
    xr, yr, _, _ = reduce_array(x, y)
    xr2, yr2, c, d = reduce_array(xr, yr)
    assert np.allclose(xr2, xr) and np.allclose(yr2, yr)
    assert np.all((c == 0) & (np.abs(d) == 1))


@pytest.mark.parametrize("z", [complex(0.3, 0.05), complex(-0.41, 0.12), complex(0.02, 0.3)])
def test_reduced_height_is_maximal(z):
    p, _ = reduce(UpperHalfPoint.from_complex(z))
    assert p.y == pytest.approx(brute_force_max_height(z, 30), rel=1e-12)


def test_reduce_array_agrees_with_scalar():
    rng = np.random.default_rng(2)
    x = rng.uniform(-1, 1, 50)
    y = rng.uniform(0.02, 2, 50)
    xr, yr, c, d = reduce_array(x, y)
    for i in range(50):
        p, g = reduce(UpperHalfPoint(x[i], y[i]))
        assert yr[i] == pytest.approx(p.y, rel=1e-10)
        w = complex(x[i], y[i])
        assert yr[i] == pytest.approx(y[i] / abs(c[i] * w + d[i]) ** 2, rel=1e-10)


def test_volume_limit():
    for y_max in (5.0, 20.0, 100.0):
        dom = TruncatedDomain(y_max)
        val = surface_integral(Constant(), dom)
        assert val == pytest.approx(VOLUME - 1.0 / y_max, rel=1e-12)


def test_cusp_strip_measure():
    dom = TruncatedDomain(1e6, breaks=(4.0,))
    assert surface_integral(CuspIndicator(4.0), dom) == pytest.approx(0.25 - 1e-6, rel=1e-10)


def test_probability_normalisation():
    dom = TruncatedDomain(50.0)
    assert surface_integral(Constant(), dom, "probability") == pytest.approx(1 - 3 / (50 * math.pi), rel=1e-12)
    with pytest.raises(ValueError):
        surface_integral(Constant(), dom, "bogus")


def test_integral_of_y_against_refined_grid():
    # oracle: same integral with a 4x refined layout
    g = type("G", (), {"height_only": False, "__call__": lambda self, x, y: y})()
    coarse = surface_integral(g, TruncatedDomain(10.0))
    fine = surface_integral(g, TruncatedDomain(10.0, y_density=240, nx=256, n_lower_y=96, n_lower_x=192))
    # frozen value: scipy dblquad of 1/y over the domain below y = 1 plus log 10
    assert coarse == pytest.approx(fine, rel=1e-12)
    assert fine == pytest.approx(2.3478138405518267, rel=1e-9)


def test_x_dependent_observable_against_parseval_route():
    g = HeightCutoff(3.0, 1.0)
    dom = TruncatedDomain(6.0)
    wrapped = type("W", (), {"height_only": False, "__call__": lambda self, x, y: g(x, y)})()
    assert surface_integral(wrapped, dom) == pytest.approx(surface_integral(g, dom), rel=1e-12)


def test_smooth_step_and_cutoff():
    t = np.linspace(-1, 2, 31)
    s = smooth_step(t)
    assert np.all(np.diff(s) >= 0) and s[0] == 0 and s[-1] == 1
    assert smooth_step(np.array([0.5]))[0] == pytest.approx(0.5)
    g = HeightCutoff(10, 1)
    assert g(0.0, 9.0) == 1.0 and g(0.0, 11.5) == 0.0
    assert parse_observable("height_cutoff(10, 1)") == g
    assert parse_observable("constant(2)") == Constant(2.0)
    with pytest.raises(ValueError):
        parse_observable("nope(1)")


def test_normalized_area_of_cutoff():
    # (3/pi)(pi/3 - int_Y^{Y+w} (1 - profile) dy/y^2 - 1/(Y+w)) evaluated independently
    from scipy.integrate import quad
    g = HeightCutoff(10, 1)
    tail = quad(lambda y: (1 - g.profile(y)) / y ** 2, 10, 11, epsabs=1e-14)[0]
    expect = 1 - 3 / math.pi * (tail + 1 / 11)
    assert normalized_area(g) == pytest.approx(expect, rel=1e-10)
