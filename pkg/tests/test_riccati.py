import cmath
import itertools

import numpy as np
import pytest

from malmquist.numkit import MobiusMap, is_inf, projective_distance
from malmquist.riccati import (CanonicalizationError, RiccatiCoefficients, audit_eq10_factor,
                               audit_eq11_factor, canonical_A, canonical_matrix, canonicalize_riccati,
                               conjugation_defect, eq10_worked_factor, eq11_lift,
                               factor_eq10_to_riccati, joukowski, riccati_orbit, riccati_step)


def test_canonical_step():
    A = 0.7 - 0.2j
    b = RiccatiCoefficients.canonical(A)
    assert abs(riccati_step(b, 0) - A) < 1e-15
    assert is_inf(riccati_step(b, -b.b3))
    f = riccati_orbit(b, 0.1 + 0.3j, 30)
    for a, c in zip(f, f[1:]):
        assert abs((c - a) - (c * a + A)) < 1e-12 * (1 + abs(c * a))


def test_degenerate_coefficients():
    with pytest.raises(ValueError):
        RiccatiCoefficients(2, 2, 1)


def test_A_example():
    A, T = canonicalize_riccati(RiccatiCoefficients(2, 1, 1))
    assert abs(A + 5 / 9) < 1e-15
    assert conjugation_defect(RiccatiCoefficients(2, 1, 1), A, T) < 1e-14


def test_already_canonical():
    A0 = 1.3 + 0.4j
    b = RiccatiCoefficients.canonical(A0)
    A, T = canonicalize_riccati(b)
    assert abs(A - A0) < 1e-14
    assert T.projectively_equal(MobiusMap.identity())
    assert conjugation_defect(b, A, T) < 1e-14


def test_non_canonicalizable():
    with pytest.raises(CanonicalizationError, match="non-canonicalizable"):
        canonical_A(RiccatiCoefficients(1, 5, -1))


def test_conjugation_random():
    rng = np.random.default_rng(99)
    for _ in range(100):
        z = rng.normal(size=6)
        b = RiccatiCoefficients(complex(z[0], z[1]), complex(z[2], z[3]), complex(z[4], z[5]))
        A, T = canonicalize_riccati(b)
        assert conjugation_defect(b, A, T) < 1e-10


def test_conjugation_orbits():
    # orbits of b map to orbits of the canonical step under T^-1
    b = RiccatiCoefficients(0.5 + 1j, -2, 0.3)
    A, T = canonicalize_riccati(b)
    f = riccati_orbit(b, 0.2, 10)
    g = [T.inverse()(x) for x in f]
    can = RiccatiCoefficients.canonical(A)
    for a, c in zip(g, g[1:]):
        assert abs(riccati_step(can, a) - c) < 1e-10 * (1 + abs(c))


def test_fixed_points():
    b = RiccatiCoefficients(2, 1, 1)
    for p in b.fixed_points():
        assert abs(riccati_step(b, p) - p) < 1e-12


def test_eq10_factors_audit():
    facs = factor_eq10_to_riccati(0.3)
    assert len(facs) == 4
    for fac in facs:
        lifted = audit_eq10_factor(fac, 0.3, 0.4 + 0.2j, steps=20)
        assert lifted.residual < 1e-8
    assert facs[0].metadata["sqrt_branch"] == "principal"


def test_eq10_factors_distinct():
    facs = factor_eq10_to_riccati(0.3)
    for a, b in itertools.combinations(facs, 2):
        assert projective_distance(a.coeffs.mobius().m, b.coeffs.mobius().m) > 1e-6


def test_eq10_worked_factor_matches_formula():
    d = 0.3
    s = cmath.sqrt(1 - d * d)
    want = MobiusMap(s + 1j * d, -1j, 1, -d + 1j * s)
    assert eq10_worked_factor(d).coeffs.mobius().projectively_equal(want, tol=1e-12)


def test_eq10_delta_excluded():
    with pytest.raises(ValueError):
        factor_eq10_to_riccati(1)


def test_joukowski():
    assert joukowski(1) == 1
    assert is_inf(joukowski(0))
    g = 0.3 + 0.8j
    assert abs(joukowski(g) - joukowski(1 / g)) < 1e-15


def test_eq11_audit():
    lifted = audit_eq11_factor(0.4 + 0.1j, steps=20)
    assert lifted.residual < 1e-8
    assert not any(lifted.singular)


def test_eq11_lift_even_and_pole():
    g = 0.7 - 0.3j
    assert abs(eq11_lift(g) - eq11_lift(-g)) < 1e-15
    lifted = audit_eq11_factor(1j, steps=3)
    assert lifted.singular[0]
