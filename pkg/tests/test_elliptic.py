import cmath
import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from malmquist.elliptic import (ModulusError, complete_K, jacobi_sn_cn_dn, sn, sn_addition,
                                sn_inverse, sn_series5)


def mp_sncndn(u, k):
    m = mpmath.mpc(k) ** 2
    u = mpmath.mpc(u)
    return tuple(complex(mpmath.ellipfun(name, u, m=m)) for name in ("sn", "cn", "dn"))


def test_K_zero():
    assert abs(complete_K(0) - math.pi / 2) < 1e-15


def test_K_against_quadrature():
    k = 0.5
    ref, _ = quad(lambda t: 1 / math.sqrt(1 - k * k * math.sin(t) ** 2), 0, math.pi / 2,
                  epsabs=1e-13, epsrel=1e-13)
    assert abs(complete_K(k) - ref) < 1e-12


@pytest.mark.parametrize("k", [0.3, 0.9, 0.2 + 0.4j, 1.5, 3j])
def test_K_against_mpmath(k):
    ref = complex(mpmath.ellipk(mpmath.mpc(k) ** 2))
    assert abs(complete_K(k) - ref) < 1e-12 * abs(ref)


def test_K_even_in_k():
    assert abs(complete_K(0.7) - complete_K(-0.7)) < 1e-15


def test_K_degenerate():
    with pytest.raises(ModulusError, match="degenerate modulus"):
        complete_K(1)


def test_trig_and_hyperbolic_limits():
    u = 0.4 + 0.3j
    s, c, d = jacobi_sn_cn_dn(u, 0)
    assert abs(s - cmath.sin(u)) < 1e-15 and abs(c - cmath.cos(u)) < 1e-15 and d == 1
    s, c, d = jacobi_sn_cn_dn(u, 1)
    assert abs(s - cmath.tanh(u)) < 1e-15
    assert abs(c - 1 / cmath.cosh(u)) < 1e-15 and abs(d - 1 / cmath.cosh(u)) < 1e-15


GRID = [0.1, 0.7, 2.5, -1.3, 0.4 + 0.6j, 1.1 - 1.7j, 3.0 + 2.2j, -2 + 0.9j, 5.5 - 3.1j]


@pytest.mark.parametrize("k", [0.2, 0.5, 0.8, 0.95, 0.3 + 0.1j, 0.6 - 0.5j, 1.4, 2 + 1j])
def test_against_mpmath(k):
    for u in GRID:
        ours = jacobi_sn_cn_dn(u, k)
        ref = mp_sncndn(u, k)
        for a, b in zip(ours, ref):
            assert abs(a - b) < 1e-10 * (1 + abs(b)), (u, k, a, b)


def test_pythagorean_identities():
    for k in (0.0, 0.3, 0.8, 0.5 + 0.2j):
        for u in GRID:
            s, c, d = jacobi_sn_cn_dn(u, k)
            assert abs(s * s + c * c - 1) < 1e-10 * (1 + abs(s) ** 2)
            assert abs(d * d + k * k * s * s - 1) < 1e-10 * (1 + abs(s) ** 2)


def test_periodicity():
    k = 0.6
    K = complete_K(k).real
    for u in (0.2, 0.3 + 0.4j):
        assert abs(sn(u + 4 * K, k) - sn(u, k)) < 1e-12
        assert abs(sn(u + 2 * K, k) + sn(u, k)) < 1e-12


def test_non_finite_argument():
    with pytest.raises(ValueError):
        jacobi_sn_cn_dn(complex(math.nan, 0), 0.5)


def test_addition_examples():
    assert abs(sn_addition(0.4, 0.0, 0.6) - sn(0.4, 0.6)) < 1e-15
    assert abs(sn_addition(0.4, 0.3, 0.0) - math.sin(0.7)) < 1e-15
    ref = complex(mpmath.ellipfun("sn", 0.7, m=0.36))
    assert abs(sn_addition(0.4, 0.3, 0.6) - ref) < 1e-12


def test_addition_minus_sign():
    assert abs(sn_addition(0.4, 0.3, 0.6, sign=-1) - sn(0.1, 0.6)) < 1e-13


def test_series_scaling():
    # remainder of the degree-5 Maclaurin polynomial is O(eps^7)
    k = 0.5
    r1 = abs(sn(0.1, k) - sn_series5(0.1, k))
    r2 = abs(sn(0.05, k) - sn_series5(0.05, k))
    assert 2**6 * 0.7 <= r1 / r2 <= 2**7 * 1.3


def test_inverse_examples():
    assert abs(sn_inverse(0, 0.5, guess=0)) < 1e-15
    assert abs(sn_inverse(math.sin(0.2), 0, guess=0.1) - 0.2) < 1e-13


@pytest.mark.parametrize("k", [0.5, 0.3 + 0.2j, 0.9])
def test_inverse_round_trip(k):
    rng = np.random.default_rng(3)
    for _ in range(20):
        w = complex(*rng.uniform(-2, 2, 2))
        u = sn_inverse(w, k)
        assert abs(sn(u, k) - w) < 1e-10 * (1 + abs(w))


def test_inverse_on_branch_cut():
    # real w > 1 lies on the cut of the principal inverse
    u = sn_inverse(1.7, 0.5)
    assert abs(sn(u, 0.5) - 1.7) < 1e-10


def test_series_value():
    assert abs(sn(0.1, 0.3) - sn_series5(0.1, 0.3)) <= 1e-9
