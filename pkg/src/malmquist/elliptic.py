"""Jacobi elliptic functions and the complete elliptic integral K.

The modulus convention is ``k`` (not the parameter ``m = k**2``). Values for
complex argument and complex modulus come from the descending Landen
transformation; the quarter period comes from the arithmetic-geometric mean.

Examples
--------
>>> from malmquist.elliptic import jacobi_sn_cn_dn
>>> sn, cn, dn = jacobi_sn_cn_dn(0.5, 0.0)
>>> abs(sn - 0.479425538604203) < 1e-15
True
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from scipy.special import elliprf

from .numkit import INF, ConvergenceError, is_inf

LANDEN_FLOOR = 1e-10
LANDEN_MAX = 40
AGM_MAX = 64


class ModulusError(ValueError):
    """The modulus lies outside the region where evaluation is certified."""


def _kprime(k: complex) -> complex:
    return cmath.sqrt(1 - k * k)


def _agm(a: complex, b: complex) -> complex:
    for _ in range(AGM_MAX):
        if abs(a - b) <= 1e-16 * abs(a):
            return a
        a, b = (a + b) / 2, cmath.sqrt(a * b)
    if abs(a - b) <= 1e-14 * abs(a):
        return a
    raise ConvergenceError("AGM did not converge in 64 steps")


def complete_K(k) -> complex:
    """Quarter period K(k) = pi / (2 AGM(1, k')).

    Raises
    ------
    ValueError
        If ``k**2 == 1`` (the integral diverges).
    """
    k = complex(k)
    if abs(k * k - 1) < 1e-15:
        raise ModulusError("degenerate modulus")
    kp = _kprime(k)
    return complex(math.pi / (2 * _agm(1.0 + 0j, kp)))


@dataclass(frozen=True)
class EllipticParams:
    """Modulus, complementary modulus and quarter period."""

    k: complex
    kprime: complex
    bigK: complex

    @classmethod
    def from_modulus(cls, k) -> "EllipticParams":
        k = complex(k)
        return cls(k, _kprime(k), complete_K(k))


def _landen_chain(k: complex) -> list[complex]:
    """Descending moduli k_1, k_2, ... starting after k, down to the floor."""
    chain = []
    cur = k
    for _ in range(LANDEN_MAX):
        if abs(cur) < LANDEN_FLOOR:
            return chain
        kp = _kprime(cur)
        nxt = (1 - kp) / (1 + kp)
        if abs(nxt) >= abs(cur):
            raise ModulusError("modulus outside certified region")
        chain.append(nxt)
        cur = nxt
    raise ModulusError("modulus outside certified region")


def _real_modulus(k: complex) -> bool:
    return k.imag == 0 and 0 < k.real < 1


def _sn_cn_dn_reduced(u: complex, k: complex):
    """Evaluate after moving ``u`` into |Re u| <= K, |Im u| <= K'/2.

    Uses sn(u + 2K) = -sn u, cn(u + 2K) = -cn u, the sign flips of cn, dn
    under u + 2iK', and the quarter shift by iK' for the outer strips, so
    the Landen ascent never works with large intermediate values.
    """
    K = complete_K(k).real
    Kp = complete_K(_kprime(k)).real
    n_re = round(u.real / (2 * K))
    n_im = round(u.imag / (2 * Kp))
    u = u - 2 * K * n_re - 2j * Kp * n_im
    sign_sn = -1 if n_re % 2 else 1
    sign_cn = sign_sn * (-1 if n_im % 2 else 1)
    sign_dn = -1 if n_im % 2 else 1
    shift = 0
    if u.imag > Kp / 2:
        shift = 1
    elif u.imag < -Kp / 2:
        shift = -1
    if shift == 0:
        s, c, d = _sn_cn_dn_landen(u, k)
    else:
        s1, c1, d1 = _sn_cn_dn_landen(u - shift * 1j * Kp, k)
        if is_inf(s1):
            return INF, INF, INF
        if s1 == 0:
            return INF, INF, INF
        # u = u1 + iK' (shift 1) or u1 - iK' (shift -1)
        s = 1 / (k * s1)
        c = -shift * 1j * d1 / (k * s1)
        d = -shift * 1j * c1 / s1
    if is_inf(s):
        return INF, INF, INF
    return sign_sn * s, sign_cn * c, sign_dn * d


def _sn_cn_dn_landen(u: complex, k: complex):
    chain = _landen_chain(k)
    scale = 1.0
    for kn in chain:
        scale *= 1 + kn
    v = u / scale
    try:
        s = cmath.sin(v)
        c = cmath.cos(v)
    except OverflowError:
        return INF, INF, INF
    d = 1.0 + 0j
    for kn in reversed(chain):
        den = 1 + kn * s * s
        if den == 0 or is_inf(s):
            return INF, INF, INF
        s, c, d = (1 + kn) * s / den, c * d / den, (1 - kn * s * s) / den
    return s, c, d


def jacobi_sn_cn_dn(u, k):
    """Simultaneous sn, cn, dn of complex argument ``u`` and modulus ``k``.

    Parameters
    ----------
    u : complex
        Argument.
    k : complex
        Modulus. Values with ``|k| > 1`` are handled by the reciprocal
        modulus transformation.

    Returns
    -------
    tuple of complex
        ``(sn, cn, dn)``; all three are ``INF`` when ``u`` sits on a pole.

    Raises
    ------
    ModulusError
        If the Landen sequence does not contract.
    """
    u = complex(u)
    k = complex(k)
    if k == 0:
        try:
            return cmath.sin(u), cmath.cos(u), 1.0 + 0j
        except OverflowError:
            return INF, INF, 1.0 + 0j
    if k * k == 1:
        try:
            t = cmath.tanh(u)
            sech = 1 / cmath.cosh(u)
        except (OverflowError, ZeroDivisionError):
            return INF, INF, INF
        return t, sech, sech
    if abs(k) > 1:
        s, c, d = jacobi_sn_cn_dn(k * u, 1 / k)
        if is_inf(s):
            return INF, INF, INF
        return s / k, d, c
    if not cmath.isfinite(u):
        raise ValueError("non-finite argument")
    if _real_modulus(k):
        return _sn_cn_dn_reduced(u, k)
    return _sn_cn_dn_landen(u, k)


def sn(u, k) -> complex:
    return jacobi_sn_cn_dn(u, k)[0]


def sn_series5(eps, k) -> complex:
    """Maclaurin polynomial of sn through order five."""
    k2 = k * k
    return eps - (1 + k2) * eps**3 / 6 + (1 + 14 * k2 + k2 * k2) * eps**5 / 120


def sn_addition(u, eps, k, sign: int = 1) -> complex:
    """sn(u + sign*eps) from the addition law.

    Raises
    ------
    ValueError
        If ``1 - k**2 sn(eps)**2 sn(u)**2`` vanishes.
    """
    su, cu, du = jacobi_sn_cn_dn(u, k)
    se, ce, de = jacobi_sn_cn_dn(eps, k)
    if any(is_inf(v) for v in (su, se)):
        raise ValueError("addition-formula singularity")
    den = 1 - k * k * se * se * su * su
    if abs(den) <= 1e-12:
        raise ValueError("addition-formula singularity")
    return (su * ce * de + sign * se * cu * du) / den


def _polish(u: complex, w: complex, k: complex, res: float) -> complex:
    # extra Newton steps while they still reduce the residual
    for _ in range(3):
        s, c, d = jacobi_sn_cn_dn(u, k)
        if is_inf(s) or c * d == 0:
            break
        trial = u - (s - w) / (c * d)
        r = abs(jacobi_sn_cn_dn(trial, k)[0] - w)
        if not r < res:
            break
        u, res = trial, r
    return u


def _inverse_guess(w: complex, k: complex) -> complex:
    # incomplete integral F(arcsin w, k); nudge off the branch cut if needed
    for nudge in (0.0, 1e-9, -1e-9):
        z = w * (1 + 1j * nudge)
        g = z * complex(elliprf(1 - z * z, 1 - k * k * z * z, 1.0 + 0j))
        if cmath.isfinite(g):
            return g
    return w


def sn_inverse(w, k, guess=None, tol: float = 1e-13, max_iter: int = 100) -> complex:
    """Solve sn(u, k) = w by Newton iteration started at ``guess``.

    Without a guess the principal incomplete integral
    ``w * R_F(1 - w**2, 1 - k**2 w**2, 1)`` is used.
    """
    w = complex(w)
    k = complex(k)
    if guess is None:
        guess = _inverse_guess(w, k)
    u = complex(guess)
    for _ in range(max_iter):
        s, c, d = jacobi_sn_cn_dn(u, k)
        if is_inf(s):
            raise ConvergenceError("Newton iterate hit a pole of sn")
        r = s - w
        if abs(r) <= tol * (1 + abs(w)):
            return _polish(u, w, k, abs(r))
        deriv = c * d
        if deriv == 0:
            raise ConvergenceError("zero derivative in sn inversion")
        step = r / deriv
        # limit steps so the iterate cannot jump between period cells
        if abs(step) > 0.5:
            step *= 0.5 / abs(step)
        u -= step
    s = jacobi_sn_cn_dn(u, k)[0]
    if abs(s - w) <= 1e-10 * (1 + abs(w)):
        return u
    raise ConvergenceError("Newton did not converge in sn_inverse")
