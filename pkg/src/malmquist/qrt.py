"""Biquadratic curves and QRT maps.

A biquadratic is stored as a 3x3 matrix ``C`` acting on the monomial vectors
``v(x) = (x**2, x, 1)``: the curve is ``v(x) @ C @ v(y) == 0``, so ``C[i, j]``
is the coefficient of ``x**(2-i) * y**(2-j)``. The point at infinity in
either slot uses the homogeneous vector ``(1, 0, 0)``.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .elliptic import complete_K, jacobi_sn_cn_dn, sn_inverse
from .numkit import INF, MobiusMap, is_inf, projective_distance

CURVE_TOL = 1e-8
FIT_GAP_MIN = 1e-6
FIT_MIN_PAIRS = 12


class OffCurveError(ValueError):
    pass


class NonUniqueFitError(ValueError):
    pass


def monomials(t) -> np.ndarray:
    """``(t**2, t, 1)``, or ``(1, 0, 0)`` at infinity."""
    if is_inf(t):
        return np.array([1.0, 0.0, 0.0], dtype=complex)
    t = complex(t)
    return np.array([t * t, t, 1.0], dtype=complex)


def _normalize(C: np.ndarray) -> np.ndarray:
    peak = C.flat[int(np.argmax(np.abs(C)))]
    if peak == 0:
        raise ValueError("zero coefficient matrix")
    return C / peak


@dataclass(frozen=True, eq=False)
class Biquadratic:
    """The curve ``v(x)^T C v(y) = 0``, normalized so max |C_ij| = 1."""

    C: np.ndarray

    def __init__(self, C):
        C = _normalize(np.asarray(C, dtype=complex).reshape(3, 3))
        C.setflags(write=False)
        object.__setattr__(self, "C", C)

    @classmethod
    def from_terms(cls, terms: dict) -> "Biquadratic":
        """Build from ``{(px, py): coeff}`` with powers of x and y."""
        C = np.zeros((3, 3), dtype=complex)
        for (px, py), val in terms.items():
            C[2 - px, 2 - py] += val
        return cls(C)

    @property
    def symmetric(self) -> bool:
        return bool(np.allclose(self.C, self.C.T, rtol=0, atol=1e-12))

    def __call__(self, x, y) -> complex:
        return biquadratic_eval(self, x, y)

    def relative_residual(self, x, y) -> float:
        vx, vy = monomials(x), monomials(y)
        scale = float(np.abs(vx) @ np.abs(self.C) @ np.abs(vy))
        if scale == 0:
            return 0.0
        return abs(complex(vx @ self.C @ vy)) / scale

    def transpose(self) -> "Biquadratic":
        return Biquadratic(self.C.T)

    def distance(self, other: "Biquadratic") -> float:
        return coefficient_distance(self.C, other.C)

    def __repr__(self) -> str:
        return f"Biquadratic({np.array2string(self.C, precision=6)})"


def coefficient_distance(a, b) -> float:
    """Cosine distance ``1 - |<a, b>| / (|a| |b|)`` between coefficient arrays."""
    u = np.ravel(a).astype(complex)
    v = np.ravel(b).astype(complex)
    return float(max(0.0, 1.0 - abs(np.vdot(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v))))


def biquadratic_eval(C: Biquadratic, x, y) -> complex:
    return complex(monomials(x) @ C.C @ monomials(y))


def canonical_curve(A, B) -> Biquadratic:
    """``x^2 y^2 + A (x^2 + y^2) + 2 B x y + 1``."""
    return Biquadratic.from_terms({(2, 2): 1, (2, 0): A, (0, 2): A, (1, 1): 2 * B, (0, 0): 1})


def _vieta_other(a, b, c, known, scale):
    """Second root of a x^2 + b x + c given the root ``known``."""
    tiny = 1e-14 * scale
    if abs(a) <= tiny:
        if abs(b) <= tiny:
            if abs(c) <= tiny:
                raise ValueError("degenerate fiber")
            # both roots at infinity
            return INF
        return INF if not is_inf(known) else complex(-c / b)
    if is_inf(known):
        raise OffCurveError("infinite root on a quadratic slice")
    total = -b / a
    other = total - known
    if known != 0 and abs(known) > 10 * abs(other):
        other = c / (a * known)
    return complex(other)


def qrt_step_symmetric(C: Biquadratic, w_prev, w_cur, tol: float = CURVE_TOL,
                       check: bool = True) -> complex:
    """Vieta step on a symmetric biquadratic.

    Given two consecutive points, return the other root in x of the slice
    ``v(x)^T C v(w_cur)``, i.e. the next iterate of the symmetric QRT map.

    Raises
    ------
    OffCurveError
        If ``(w_prev, w_cur)`` is not on the curve within ``tol``.
    ValueError
        If the slice vanishes identically.
    """
    if check:
        if not C.symmetric:
            raise ValueError("curve is not symmetric")
        if C.relative_residual(w_prev, w_cur) > tol:
            raise OffCurveError("point off curve")
    a, b, c = C.C @ monomials(w_cur)
    scale = float(np.max(np.abs([a, b, c])))
    if scale == 0:
        raise ValueError("degenerate fiber")
    return _vieta_other(a, b, c, w_prev, scale)


@dataclass(frozen=True, eq=False)
class QRTPencil:
    """A pencil ``C0 + K C1`` of biquadratics defining a general QRT map."""

    C0: np.ndarray
    C1: np.ndarray

    def __post_init__(self):
        C0 = np.asarray(self.C0, dtype=complex).reshape(3, 3)
        C1 = np.asarray(self.C1, dtype=complex).reshape(3, 3)
        if not (np.any(C0) and np.any(C1)) or projective_distance(C0, C1) <= 1e-10:
            raise ValueError("pencil matrices are linearly dependent")
        object.__setattr__(self, "C0", C0)
        object.__setattr__(self, "C1", C1)

    @property
    def symmetric(self) -> bool:
        return bool(np.allclose(self.C0, self.C0.T, atol=1e-12)
                    and np.allclose(self.C1, self.C1.T, atol=1e-12))


def _mobius_from_cross(f: np.ndarray, z):
    f1, f2, f3 = f
    if is_inf(z):
        num, den = -f2, -f3
    else:
        num, den = f1 - z * f2, f2 - z * f3
    scale = max(abs(num), abs(den))
    if scale == 0:
        raise ValueError("degenerate fiber")
    if abs(den) <= 1e-12 * scale:
        return INF
    return complex(num / den)


def qrt_step_general(P: QRTPencil, x, y):
    """One step of the asymmetric QRT map: first x, then y.

    Returns
    -------
    (x_next, y_next) : tuple of complex
        Either may be ``INF`` when a denominator vanishes.
    """
    vy = monomials(y)
    f = np.cross(P.C0 @ vy, P.C1 @ vy)
    x_next = _mobius_from_cross(f, x)
    vx = monomials(x_next)
    g = np.cross(P.C0.T @ vx, P.C1.T @ vx)
    y_next = _mobius_from_cross(g, y)
    return x_next, y_next


def qrt_invariant(P: QRTPencil, x, y) -> complex:
    """K = -(v(x)^T C0 v(y)) / (v(x)^T C1 v(y))."""
    vx, vy = monomials(x), monomials(y)
    num = complex(vx @ P.C0 @ vy)
    den = complex(vx @ P.C1 @ vy)
    if abs(den) <= 1e-14 * (abs(num) + 1e-300) or den == 0:
        raise ZeroDivisionError("invariant pole")
    return -num / den


@dataclass(frozen=True)
class SymmetricQRTParams:
    """Coefficients of the canonical curve x^2y^2 + A(x^2+y^2) + 2Bxy + 1."""

    A: complex
    B: complex

    def __post_init__(self):
        if self.A == 0:
            raise ValueError("A must be nonzero")

    @classmethod
    def from_elliptic(cls, k, eps) -> "SymmetricQRTParams":
        s, c, d = jacobi_sn_cn_dn(eps, k)
        kss = k * s * s
        return cls(complex(-1 / kss), complex(c * d / kss))

    def curve(self) -> Biquadratic:
        return canonical_curve(self.A, self.B)


class ParametrizationError(ValueError):
    pass


def parametrize_symmetric(params: SymmetricQRTParams, sign: int = 1):
    """Modulus and shift for the canonical symmetric curve.

    Solves ``k + 1/k = (B^2 - A^2 - 1)/A`` for the root with ``|k| <= 1``,
    then ``sn(eps)^2 = -1/(k A)``. Of the candidates ``eps`` and
    ``2K - eps`` the one with ``cn dn / (k sn^2) = sign * B`` is returned.

    Returns
    -------
    (k, eps) : tuple of complex
    """
    A = complex(params.A)
    B = complex(params.B)
    if A == 0:
        raise ValueError("A must be nonzero")
    s = (B * B - A * A - 1) / A
    disc = cmath.sqrt(s * s - 4)
    roots = [(s + disc) / 2, (s - disc) / 2]
    k = min(roots, key=abs)
    if k == 0 or abs(k * k - 1) < 1e-14:
        raise ParametrizationError("parametrization failure: degenerate modulus")
    target = sign * B
    w = cmath.sqrt(-1 / (k * A))
    eps0 = sn_inverse(w, k)
    K = complete_K(k)
    best = None
    for eps in (eps0, 2 * K - eps0):
        sv, cv, dv = jacobi_sn_cn_dn(eps, k)
        if is_inf(sv) or sv == 0:
            continue
        got = cv * dv / (k * sv * sv)
        err = abs(got - target) / (1 + abs(target))
        if best is None or err < best[0]:
            best = (err, eps)
    if best is None or best[0] > 1e-8:
        raise ParametrizationError("parametrization failure")
    return complex(k), complex(best[1])


@dataclass(frozen=True)
class SampledOrbit:
    """Plain sample sequence with singularity flags."""

    values: list
    singular: list

    def __len__(self):
        return len(self.values)


def exact_symmetric_orbit(k, eps, C0, m_count: int) -> SampledOrbit:
    """Samples ``f_m = sqrt(k) sn(eps*m + C0, k)`` for ``m = 0..m_count-1``."""
    root_k = cmath.sqrt(complex(k))
    values, flags = [], []
    for m in range(m_count):
        s = jacobi_sn_cn_dn(eps * m + C0, k)[0]
        if is_inf(s) or abs(s) > 1e12:
            values.append(INF)
            flags.append(True)
        else:
            values.append(complex(root_k * s))
            flags.append(False)
    return SampledOrbit(values, flags)


def mobius_lift_matrix(T: MobiusMap) -> np.ndarray:
    """Matrix M with ``v(T(x)) (c x + d)^2 = M v(x)``."""
    (a, b), (c, d) = T.m
    return np.array([
        [a * a, 2 * a * b, b * b],
        [a * c, a * d + b * c, b * d],
        [c * c, 2 * c * d, d * d],
    ], dtype=complex)


def mobius_transform_biquadratic(C: Biquadratic, T_x: MobiusMap, T_y: MobiusMap) -> Biquadratic:
    """Pull a curve back along ``x -> T_x(x)``, ``y -> T_y(y)``.

    The result C' satisfies ``v(x)^T C' v(y) = 0`` exactly when
    ``(T_x(x), T_y(y))`` lies on ``C``.
    """
    Mx = mobius_lift_matrix(T_x)
    My = mobius_lift_matrix(T_y)
    return Biquadratic(Mx.T @ C.C @ My)


@dataclass(frozen=True)
class BiquadraticFit:
    curve: Biquadratic
    gap: float
    residual: float
    singular_values: np.ndarray = field(repr=False)


def fit_biquadratic(pairs: Iterable[Sequence[complex]], min_gap: float = FIT_GAP_MIN) -> BiquadraticFit:
    """Least-squares biquadratic through a set of points.

    Each pair contributes one row ``kron(v(x), v(y))`` (scaled to unit
    norm) of a 9-column design matrix. The right singular vector for the
    smallest singular value is the curve.

    Raises
    ------
    ValueError
        Fewer than 12 pairs, or non-finite data.
    NonUniqueFitError
        When ``(s[-2] - s[-1]) / s[0] < min_gap``.
    """
    pts = [(complex(x), complex(y)) for x, y in pairs]
    if len(pts) < FIT_MIN_PAIRS:
        raise ValueError(f"need at least {FIT_MIN_PAIRS} pairs, got {len(pts)}")
    if not all(cmath.isfinite(x) and cmath.isfinite(y) for x, y in pts):
        raise ValueError("pairs must be finite")
    rows = np.array([np.kron(monomials(x), monomials(y)) for x, y in pts])
    rows /= np.linalg.norm(rows, axis=1, keepdims=True)
    _, s, Vh = np.linalg.svd(rows)
    gap = float((s[-2] - s[-1]) / s[0])
    if gap < min_gap:
        raise NonUniqueFitError(f"non-unique curve (gap {gap:.3g})")
    curve = Biquadratic(Vh[-1].conj().reshape(3, 3))
    residual = max(curve.relative_residual(x, y) for x, y in pts)
    return BiquadraticFit(curve, gap, residual, s)
