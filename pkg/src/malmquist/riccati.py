"""Difference Riccati equations f' = (b1 f + b2)/(f + b3).

Includes the reduction to the canonical form f' - f = f' f + A and the
factorizations of two catalog equations (E10, E11) into Riccati steps on a
square-root variable.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .catalog import EquationId, catalog_get
from .numkit import INF, MobiusMap, is_inf, mobius_apply, mobius_conjugate, ratmap_eval


class CanonicalizationError(ValueError):
    pass


@dataclass(frozen=True)
class RiccatiCoefficients:
    """Autonomous coefficients of ``f' = (b1 f + b2)/(f + b3)``."""

    b1: complex
    b2: complex
    b3: complex

    def __post_init__(self):
        for name in ("b1", "b2", "b3"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if abs(self.b2 - self.b1 * self.b3) <= 1e-14 * (1 + abs(self.b2) + abs(self.b1 * self.b3)):
            raise ValueError("degenerate Riccati map: b2 = b1*b3")

    @classmethod
    def canonical(cls, A) -> "RiccatiCoefficients":
        """Coefficients of f' = (f + A)/(1 - f)."""
        return cls(-1, -complex(A), -1)

    @classmethod
    def from_mobius(cls, M: MobiusMap) -> "RiccatiCoefficients":
        (a, b), (c, d) = M.m
        if abs(c) <= 1e-14:
            raise ValueError("affine map has no Riccati normalization (c = 0)")
        return cls(a / c, b / c, d / c)

    def mobius(self) -> MobiusMap:
        return MobiusMap(self.b1, self.b2, 1, self.b3)

    def fixed_points(self) -> tuple[complex, complex]:
        """Roots of f**2 + (b3 - b1) f - b2."""
        p = self.b3 - self.b1
        disc = cmath.sqrt(p * p + 4 * self.b2)
        return ((-p + disc) / 2, (-p - disc) / 2)

    def as_tuple(self) -> tuple:
        return (self.b1, self.b2, self.b3)


def riccati_step(b: RiccatiCoefficients, f):
    return mobius_apply(b.mobius(), f)


def riccati_orbit(b: RiccatiCoefficients, f0, steps: int) -> list:
    out = [complex(f0)]
    for _ in range(steps):
        out.append(riccati_step(b, out[-1]))
    return out


def canonical_A(b: RiccatiCoefficients) -> complex:
    """A = -(4 b2 + (b1 - b3)**2) / (b1 + b3)**2."""
    s = b.b1 + b.b3
    if abs(s) <= 1e-14 * (1 + abs(b.b1) + abs(b.b3)):
        raise CanonicalizationError("non-canonicalizable: b1 = -b3")
    return -(4 * b.b2 + (b.b1 - b.b3) ** 2) / (s * s)


def canonicalize_riccati(b: RiccatiCoefficients) -> tuple[complex, MobiusMap]:
    """Affine change of variable bringing ``b`` to f' - f = f' f + A.

    Returns
    -------
    A : complex
    T : MobiusMap
        ``f -> ((-b3 - b1) f + (b1 - b3)) / 2``; conjugating the step by T
        gives a map projectively equal to ``(1, A; -1, 1)``.
    """
    A = canonical_A(b)
    T = MobiusMap((-b.b3 - b.b1) / 2, (b.b1 - b.b3) / 2, 0, 1)
    return A, T


def canonical_matrix(A) -> MobiusMap:
    return MobiusMap(1, A, -1, 1)


def conjugation_defect(b: RiccatiCoefficients, A, T: MobiusMap) -> float:
    """Entrywise gap between T^-1 M_b T and (1, A; -1, 1).

    The conjugate is rescaled by the least-squares optimal factor before
    comparing, so the value is zero exactly for projective equality.
    """
    got = mobius_conjugate(b.mobius(), T).m.ravel()
    want = np.array([1, A, -1, 1], dtype=complex)
    lam = np.vdot(got, want) / np.vdot(got, got)
    return float(np.max(np.abs(lam * got - want)) / np.max(np.abs(want)))


# factorizations

@dataclass(frozen=True)
class RiccatiFactor:
    coeffs: RiccatiCoefficients
    theta: int
    sigma: int
    metadata: dict = field(default_factory=dict)


def joukowski(g):
    """f = (g + 1/g)/2."""
    if is_inf(g) or g == 0:
        return INF
    return (g + 1 / g) / 2


def factor_eq10_to_riccati(delta) -> list[RiccatiFactor]:
    """Four Riccati maps whose orbits lift to E10 orbits via f = (g + 1/g)/2.

    With ``s = sqrt(1 - delta**2)`` (principal branch) and ``sigma = +-1``
    the theta = +1 maps are
    ``g' = ((s + sigma i delta) g - sigma i) / (g - delta + sigma i s)``;
    the theta = -1 maps send g to the negative reciprocal of those values.

    Raises
    ------
    ValueError
        If ``delta = +-1``.
    """
    d = complex(delta)
    if abs(d * d - 1) <= 1e-12:
        raise ValueError("delta = +-1 excluded")
    s = cmath.sqrt(1 - d * d)
    out = []
    for theta in (1, -1):
        for sigma in (1, -1):
            a, b, c, dd = s + sigma * 1j * d, -sigma * 1j, 1, -d + sigma * 1j * s
            if theta == -1:
                # g' -> -1/g' : (c, d; -a, -b)
                a, b, c, dd = c, dd, -a, -b
            M = MobiusMap(a, b, c, dd)
            coeffs = RiccatiCoefficients.from_mobius(M)
            out.append(RiccatiFactor(coeffs, theta, sigma,
                                     {"sqrt_branch": "principal", "sqrt_1_minus_delta2": s}))
    return out


def eq10_worked_factor(delta) -> RiccatiFactor:
    """The theta = +1, sigma = +1 factor."""
    return factor_eq10_to_riccati(delta)[0]


def eq11_lift(g):
    """f = (8 g^2 - (g^2 + 1)^2) / (g^2 + 1)^2; infinite at g^2 = -1."""
    if is_inf(g):
        return -1 + 0j
    q = g * g + 1
    if abs(q) <= 1e-14 * (1 + abs(g * g)):
        return INF
    return (8 * g * g - q * q) / (q * q)


@dataclass(frozen=True)
class Eq11Factor:
    gamma_map: RiccatiCoefficients
    lift: Callable


def factor_eq11_to_riccati() -> Eq11Factor:
    """Riccati map g' = ((1 + r) g - i)/(g + i (1 + r)), r = sqrt 2, with its lift."""
    r = 1 + math.sqrt(2)
    return Eq11Factor(RiccatiCoefficients(r, -1j, 1j * r), eq11_lift)


@dataclass(frozen=True)
class LiftedOrbit:
    gamma: list
    f: list
    singular: list
    residual: float


def lift_and_audit(coeffs: RiccatiCoefficients, lift: Callable, eid, params, gamma0,
                   steps: int) -> LiftedOrbit:
    """Iterate the Riccati map, lift each value and audit the target equation."""
    eq = catalog_get(eid, params)
    gam = riccati_orbit(coeffs, gamma0, steps)
    fs = [lift(g) for g in gam]
    sing = [is_inf(f) for f in fs]
    worst = 0.0
    for m in range(steps):
        if sing[m] or sing[m + 1]:
            continue
        r = ratmap_eval(eq.R, fs[m])
        if is_inf(r):
            continue
        worst = max(worst, abs(fs[m + 1] ** eq.n - r) / (1 + abs(r)))
    return LiftedOrbit(gam, fs, sing, worst)


def audit_eq10_factor(factor: RiccatiFactor, delta, gamma0, steps: int = 20) -> LiftedOrbit:
    return lift_and_audit(factor.coeffs, joukowski, EquationId.E10, {"delta": delta}, gamma0, steps)


def audit_eq11_factor(gamma0, steps: int = 20) -> LiftedOrbit:
    fac = factor_eq11_to_riccati()
    return lift_and_audit(fac.gamma_map, fac.lift, EquationId.E11, {}, gamma0, steps)
