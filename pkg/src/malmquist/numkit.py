"""Complex polynomials, root finding, Mobius maps and rational maps.

Everything here works on the Riemann sphere: the point at infinity is any
complex number for which ``cmath.isinf`` is true, and :data:`INF` is the
canonical representative returned by this module.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

INF = complex(math.inf, 0.0)

ROOT_TOL = 1e-12
GCD_TOL = 1e-9
DET_TOL = 1e-14
MAX_ITER = 200


class ConvergenceError(RuntimeError):
    """An iterative method did not converge."""


def is_inf(z) -> bool:
    return cmath.isinf(z)


def _trim(coeffs: np.ndarray, rtol: float = 0.0) -> np.ndarray:
    c = np.asarray(coeffs, dtype=complex)
    if c.size == 0:
        return np.zeros(1, dtype=complex)
    scale = np.max(np.abs(c))
    cut = rtol * scale
    n = c.size
    while n > 1 and abs(c[n - 1]) <= cut:
        n -= 1
    return c[:n].copy()


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Complex polynomial with coefficients in ascending degree."""

    coeffs: np.ndarray

    def __init__(self, coeffs: Sequence[complex], rtol: float = 0.0):
        c = _trim(np.atleast_1d(np.asarray(coeffs, dtype=complex)), rtol)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        if self.is_zero():
            return 0
        return self.coeffs.size - 1

    def is_zero(self) -> bool:
        return self.coeffs.size == 1 and self.coeffs[0] == 0

    def scale(self) -> float:
        return 1.0 + float(np.max(np.abs(self.coeffs)))

    def __call__(self, z):
        if is_inf(z):
            if self.degree == 0:
                return complex(self.coeffs[0])
            return INF
        acc = 0j
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        return acc

    def derivative(self) -> "Polynomial":
        return Polynomial(npoly.polyder(self.coeffs))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(npoly.polyadd(self.coeffs, other.coeffs))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(npoly.polysub(self.coeffs, other.coeffs))

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return Polynomial(npoly.polymul(self.coeffs, other.coeffs))
        return Polynomial(self.coeffs * complex(other))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        out = Polynomial([1.0])
        for _ in range(k):
            out = out * self
        return out

    def divmod(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        q, r = npoly.polydiv(self.coeffs, other.coeffs)
        return Polynomial(q), Polynomial(r)

    def monic(self) -> "Polynomial":
        return Polynomial(self.coeffs / self.coeffs[-1])

    def allclose(self, other: "Polynomial", atol: float = 1e-12) -> bool:
        n = max(self.coeffs.size, other.coeffs.size)
        a = np.zeros(n, complex)
        b = np.zeros(n, complex)
        a[: self.coeffs.size] = self.coeffs
        b[: other.coeffs.size] = other.coeffs
        return bool(np.all(np.abs(a - b) <= atol))

    @classmethod
    def from_roots(cls, roots: Sequence[complex], lead: complex = 1.0) -> "Polynomial":
        if len(roots) == 0:
            return cls([lead])
        return cls(npoly.polyfromroots(np.asarray(roots, complex)) * lead)

    def __repr__(self) -> str:
        return f"Polynomial({list(self.coeffs)})"


def _sort_roots(roots) -> list[complex]:
    return sorted((complex(r) for r in roots), key=lambda r: (r.real, r.imag))


def poly_roots(p: Polynomial, tol: float = ROOT_TOL, max_iter: int = MAX_ITER,
               seed: int = 0) -> list[complex]:
    """All roots of ``p`` (with multiplicity) by Aberth-Ehrlich iteration.

    The starting points lie on a ring whose radius comes from the Cauchy
    bound, perturbed by a seeded random rotation so that results are
    reproducible. A root is frozen once its backward error
    ``|p(z)| <= tol * sum |a_i| |z|^i`` is reached, or its correction
    stalls at roundoff level.

    Returns the roots sorted by (real part, imaginary part).
    """
    if p.degree < 1:
        raise ValueError("constant polynomial")
    a = p.coeffs
    n = p.degree
    if n == 1:
        return [complex(-a[0] / a[1])]

    dp = p.derivative()
    abs_coeffs = Polynomial(np.abs(a))
    rng = np.random.default_rng(seed)
    lead = abs(a[-1])
    radius = 1.0 + float(np.max(np.abs(a[:-1]))) / lead
    # a smaller radius from the geometric mean keeps the ring near the roots
    radius = min(radius, 2.0 * abs(a[0] / a[-1]) ** (1.0 / n) + 1e-3) if a[0] != 0 else min(radius, 1.0)
    angles = 2 * np.pi * np.arange(n) / n + 0.4 + 0.1 * rng.random()
    z = radius * np.exp(1j * angles) * (1 + 0.01 * rng.random(n))

    done = np.zeros(n, dtype=bool)
    for _ in range(max_iter):
        for i in range(n):
            if done[i]:
                continue
            zi = z[i]
            pv = p(zi)
            if abs(pv) <= tol * abs_coeffs(abs(zi)):
                done[i] = True
                continue
            ratio = pv / dp(zi) if dp(zi) != 0 else INF
            diffs = zi - np.delete(z, i)
            repulsion = np.sum(1.0 / diffs) if np.all(diffs != 0) else INF
            if is_inf(ratio):
                step = 1e-3 * (1 + abs(zi))
            elif is_inf(repulsion):
                step = ratio
            else:
                step = ratio / (1 - ratio * repulsion)
            z[i] = zi - step
            if abs(step) <= 4 * np.finfo(float).eps * (1 + abs(z[i])):
                done[i] = True
        if np.all(done):
            break
    else:
        raise ConvergenceError(f"Aberth iteration did not converge in {max_iter} steps")

    # Newton polish against the original coefficients
    for i in range(n):
        for _ in range(3):
            d = dp(z[i])
            if d == 0:
                break
            step = p(z[i]) / d
            if abs(step) > 1e-6 * (1 + abs(z[i])):
                break
            z[i] -= step
    return _sort_roots(z)


@dataclass(frozen=True, eq=False)
class MobiusMap:
    """The map z -> (a z + b) / (c z + d), stored projectively.

    The matrix is normalized on construction so that its largest-magnitude
    entry equals 1.
    """

    m: np.ndarray

    def __init__(self, a, b=None, c=None, d=None):
        if b is None:
            mat = np.asarray(a, dtype=complex).reshape(2, 2)
        else:
            mat = np.array([[a, b], [c, d]], dtype=complex)
        if not np.all(np.isfinite(mat)):
            raise ValueError("non-finite Mobius coefficients")
        peak = mat.flat[int(np.argmax(np.abs(mat)))]
        if peak == 0:
            raise ValueError("degenerate Mobius map: zero matrix")
        mat = mat / peak
        if abs(np.linalg.det(mat)) <= DET_TOL:
            raise ValueError("degenerate Mobius map: determinant vanishes")
        mat.setflags(write=False)
        object.__setattr__(self, "m", mat)

    @classmethod
    def identity(cls) -> "MobiusMap":
        return cls(1, 0, 0, 1)

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.m))

    def __call__(self, z):
        return mobius_apply(self, z)

    def inverse(self) -> "MobiusMap":
        (a, b), (c, d) = self.m
        return MobiusMap(d, -b, -c, a)

    def compose(self, other: "MobiusMap") -> "MobiusMap":
        """``self o other``, i.e. z -> self(other(z))."""
        return MobiusMap(self.m @ other.m)

    __matmul__ = compose

    def trace_invariant(self) -> complex:
        """trace^2 / det, which is invariant under conjugation."""
        return complex(np.trace(self.m) ** 2 / np.linalg.det(self.m))

    def projectively_equal(self, other: "MobiusMap", tol: float = 1e-12) -> bool:
        return projective_distance(self.m, other.m) <= tol

    def __repr__(self) -> str:
        (a, b), (c, d) = self.m
        return f"MobiusMap({a:.6g}, {b:.6g}; {c:.6g}, {d:.6g})"


def projective_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Distance between the complex lines spanned by two arrays.

    Zero iff ``b`` is a nonzero multiple of ``a``; both are flattened and
    scaled to unit norm first, so the value lies in [0, 1].
    """
    u = np.ravel(a).astype(complex)
    v = np.ravel(b).astype(complex)
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    lam = np.vdot(u, v)
    return float(np.linalg.norm(v - lam * u))


def mobius_apply(T: MobiusMap, z):
    (a, b), (c, d) = T.m
    if is_inf(z):
        return INF if c == 0 else complex(a / c)
    num = a * z + b
    den = c * z + d
    if abs(den) <= 1e-15 * (abs(c * z) + abs(d)):
        return INF
    return complex(num / den)


def mobius_conjugate(M: MobiusMap, T: MobiusMap) -> MobiusMap:
    """``T^-1 o M o T`` normalized projectively."""
    if abs(T.det) <= DET_TOL:
        raise ValueError("determinant underflow in conjugating map")
    return T.inverse() @ M @ T


def _common_roots(num: Polynomial, den: Polynomial, tol: float) -> list[tuple[complex, complex]]:
    if num.degree < 1 or den.degree < 1:
        return []
    rn = poly_roots(num)
    rd = poly_roots(den)
    pairs = []
    used = set()
    for r in rn:
        best = None
        for j, s in enumerate(rd):
            if j in used:
                continue
            if abs(r - s) <= tol * (1 + abs(r)):
                if best is None or abs(r - s) < abs(r - rd[best]):
                    best = j
        if best is not None:
            used.add(best)
            pairs.append((r, rd[best]))
    return pairs


@dataclass(frozen=True, eq=False)
class RationalMap:
    """R(f) = num(f) / den(f) with coprime numerator and denominator."""

    num: Polynomial
    den: Polynomial

    def __post_init__(self):
        if self.den.is_zero():
            raise ValueError("denominator identically zero")
        if _common_roots(self.num, self.den, GCD_TOL):
            raise ValueError("numerator and denominator share a root")

    @classmethod
    def from_coeffs(cls, num: Sequence[complex], den: Sequence[complex] = (1.0,)) -> "RationalMap":
        return cls(Polynomial(num), Polynomial(den))

    @property
    def degree(self) -> int:
        return max(self.num.degree, self.den.degree)

    def __call__(self, z):
        return ratmap_eval(self, z)

    def value_at_infinity(self):
        if self.num.degree > self.den.degree:
            return INF
        if self.num.degree < self.den.degree or self.num.is_zero():
            return 0j
        return complex(self.num.coeffs[-1] / self.den.coeffs[-1])

    def normalized(self) -> "RationalMap":
        lead = self.den.coeffs[-1]
        return RationalMap(Polynomial(self.num.coeffs / lead), Polynomial(self.den.coeffs / lead))

    def allclose(self, other: "RationalMap", atol: float = 1e-12) -> bool:
        a = self.normalized()
        b = other.normalized()
        return a.num.allclose(b.num, atol) and a.den.allclose(b.den, atol)

    def __repr__(self) -> str:
        return f"RationalMap(num={list(self.num.coeffs)}, den={list(self.den.coeffs)})"


def ratmap_eval(R: RationalMap, z, tol: float = 1e-13):
    if is_inf(z):
        return R.value_at_infinity()
    n = R.num(z)
    d = R.den(z)
    if abs(d) <= tol * R.den.scale() * max(1.0, abs(z)) ** R.den.degree:
        if abs(n) <= tol * R.num.scale() * max(1.0, abs(z)) ** R.num.degree:
            raise ValueError("common-root evaluation")
        return INF
    return complex(n / d)


def _cancel_common(num: Polynomial, den: Polynomial) -> tuple[Polynomial, Polynomial]:
    pairs = _common_roots(num, den, GCD_TOL)
    if not pairs:
        return num, den
    rn = poly_roots(num)
    rd = poly_roots(den)
    for r, s in pairs:
        rn.remove(r)
        rd.remove(s)
    return (Polynomial.from_roots(rn, num.coeffs[-1]),
            Polynomial.from_roots(rd, den.coeffs[-1]))


def ratmap_pullback(R: RationalMap, T: MobiusMap) -> RationalMap:
    """The composite ``R o T`` as a normalized rational map."""
    (a, b), (c, d) = T.m
    if abs(a * d - b * c) <= DET_TOL:
        raise ValueError("degenerate Mobius map")
    top = Polynomial([b, a])
    bottom = Polynomial([d, c])
    D = R.degree

    def homogenize(p: Polynomial) -> Polynomial:
        acc = Polynomial([0.0])
        for i, ci in enumerate(p.coeffs):
            if ci != 0:
                acc = acc + (top ** i) * (bottom ** (D - i)) * ci
        return acc

    num = homogenize(R.num)
    den = homogenize(R.den)
    scale = max(float(np.max(np.abs(num.coeffs))), float(np.max(np.abs(den.coeffs))))
    num = Polynomial(num.coeffs / scale, rtol=1e-14)
    den = Polynomial(den.coeffs / scale, rtol=1e-14)
    num, den = _cancel_common(num, den)
    lead = den.coeffs[-1]
    return RationalMap(Polynomial(num.coeffs / lead), Polynomial(den.coeffs / lead))
