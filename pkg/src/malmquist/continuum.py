"""Continuum-limit studies: discrete schemes against reference ODE solutions.

A study runs a discrete recurrence with lattice spacing ``eps`` for a list
of spacings, measures the sup-norm distance to a reference ODE solution at
the lattice times ``t_m = m * eps``, and fits the convergence order.
"""
from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .elliptic import jacobi_sn_cn_dn
from .numkit import is_inf, mobius_apply
from .riccati import canonicalize_riccati, eq10_worked_factor

BLOWUP = 1e12
NOISE_FLOOR = 1e-13
SCHEMA_VERSION = "1"


class BlowUpError(RuntimeError):
    pass


# reference integrator

@dataclass
class Trajectory:
    """RK4 nodes with cubic Hermite dense output."""

    t: np.ndarray
    w: np.ndarray
    dw: np.ndarray
    blowup: bool = False

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    def __call__(self, t):
        t = float(t)
        if t < self.t[0] - 1e-12 or t > self.t[-1] + 1e-12:
            raise ValueError(f"t = {t} outside the integrated window")
        i = int(np.clip(np.searchsorted(self.t, t) - 1, 0, len(self.t) - 2))
        t0, t1 = self.t[i], self.t[i + 1]
        h = t1 - t0
        s = (t - t0) / h
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        return h00 * self.w[i] + h10 * h * self.dw[i] + h01 * self.w[i + 1] + h11 * h * self.dw[i + 1]


def ode_solve(field: Callable, t0: float, w0, T: float, h: float,
              growth_limit: float = 1.0) -> Trajectory:
    """Classical fixed-step RK4 from ``t0`` to ``T``.

    The step is shrunk slightly so that it divides ``T - t0``. If ``field``
    has an ``accept(t, w)`` method it is called after every step (used by
    the square-root fields to track their sign).

    Blow-up is flagged, and the trajectory truncated, when ``|w|`` exceeds
    1e12, becomes non-finite, or a single step grows the state by more than
    ``growth_limit`` relative to ``1 + |w|`` (an under-resolved approach to
    a movable singularity).
    """
    if h <= 0:
        raise ValueError("h must be positive")
    n = max(1, int(math.ceil((T - t0) / h - 1e-9)))
    h = (T - t0) / n
    w = np.asarray(w0, dtype=complex)
    ts, ws, dws = [t0], [w.copy()], []
    t = t0
    k1 = np.asarray(field(t, w), dtype=complex)
    dws.append(k1)
    blowup = False
    for _ in range(n):
        k2 = np.asarray(field(t + h / 2, w + h / 2 * k1), dtype=complex)
        k3 = np.asarray(field(t + h / 2, w + h / 2 * k2), dtype=complex)
        k4 = np.asarray(field(t + h, w + h * k3), dtype=complex)
        w_new = w + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        size = float(np.max(np.abs(w_new))) if np.all(np.isfinite(w_new)) else math.inf
        jump = float(np.max(np.abs(w_new - w))) / (1 + float(np.max(np.abs(w))))
        if not size < BLOWUP or jump > growth_limit:
            blowup = True
            break
        t = t + h
        w = w_new
        if hasattr(field, "accept"):
            field.accept(t, w)
        k1 = np.asarray(field(t, w), dtype=complex)
        ts.append(t)
        ws.append(w.copy())
        dws.append(k1)
    return Trajectory(np.array(ts), np.array(ws), np.array(dws), blowup)


class SqrtField:
    """First-order form ``w' = s sqrt(rhs(w))`` of ``(w')^2 = rhs(w)``.

    The sign is chosen at every evaluation to be the one nearest a
    reference derivative. After each accepted step the reference is moved
    to the derivative at the new point, predicted forward with
    ``w'' = rhs'(w)/2`` so that simple turning points are crossed.
    """

    def __init__(self, rhs: Callable, rhs_prime: Callable, w0, d0_hint):
        self.rhs = rhs
        self.rhs_prime = rhs_prime
        r = cmath.sqrt(rhs(complex(w0)))
        self.ref = r if abs(r - d0_hint) <= abs(-r - d0_hint) else -r
        self._t = None

    def _branch(self, w, guide):
        r = cmath.sqrt(self.rhs(complex(w)))
        return r if abs(r - guide) <= abs(-r - guide) else -r

    def __call__(self, t, w):
        return self._branch(w, self.ref)

    def accept(self, t, w):
        prev_t = self._t if self._t is not None else t
        guide = self.ref + (t - prev_t) * 0.5 * self.rhs_prime(complex(w))
        self.ref = self._branch(w, guide)
        self._t = t


# studies

def fit_order(eps: Sequence[float], errors: Sequence[float], floor: float = NOISE_FLOOR) -> float:
    """Least-squares slope of log(error) against log(eps), ignoring the noise floor."""
    pts = [(math.log(e), math.log(r)) for e, r in zip(eps, errors)
           if r is not None and math.isfinite(r) and r > floor]
    if len(pts) < 2:
        return math.nan
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])


@dataclass
class LimitStudy:
    eps_list: list
    errors: list
    fitted_order: float
    window: tuple
    flagged: list = field(default_factory=list)
    blowup: bool = False
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.eps_list) != len(self.errors):
            raise ValueError("eps_list and errors differ in length")
        if any(a <= b for a, b in zip(self.eps_list, self.eps_list[1:])):
            raise ValueError("eps_list must be strictly decreasing")

    def to_json(self) -> dict:
        def num(x):
            return None if x is None or not math.isfinite(x) else float(x)

        return {
            "schema_version": SCHEMA_VERSION,
            "eps": [float(e) for e in self.eps_list],
            "errors": [num(e) for e in self.errors],
            "fitted_order": num(self.fitted_order),
            "window": [float(self.window[0]), float(self.window[1])],
            "flagged": list(self.flagged),
            "blowup": self.blowup,
            "extra": {k: _jsonable(v) for k, v in self.extra.items()},
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps", "error"])
        for e, r in zip(self.eps_list, self.errors):
            w.writerow([format(e, ".17g"), format(r, ".17g")])
        return buf.getvalue()


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _eps_sorted(eps_list) -> list:
    eps = sorted({float(e) for e in eps_list}, reverse=True)
    if not eps or eps[-1] <= 0:
        raise ValueError("eps values must be positive")
    return eps


def riccati_limit_study(A_tilde, w0, T: float, eps_list, h_ref: Optional[float] = None) -> LimitStudy:
    """Canonical Riccati scheme ``w' = (w + eps A)/(1 - eps w)`` against w' = w^2 + A.

    For each eps the scheme runs ``ceil(T/eps)`` steps; the error is the
    sup over lattice times of the distance to an RK4 reference integrated
    with step ``h_ref`` (default ``min(eps)/4``).

    Raises
    ------
    BlowUpError
        If the reference solution blows up inside the window.
    """
    A = complex(A_tilde)
    w0 = complex(w0)
    eps = _eps_sorted(eps_list)
    t_end = max(math.ceil(T / e - 1e-9) * e for e in eps)
    h = h_ref or min(eps) / 4
    ref = ode_solve(lambda t, w: w * w + A, 0.0, w0, t_end, h)
    if ref.blowup:
        raise BlowUpError(f"reference solution blows up near t = {ref.t_end:.6g}")
    errors, flagged = [], []
    for e in eps:
        steps = math.ceil(T / e - 1e-9)
        w = w0
        worst = 0.0
        ok = True
        for m in range(1, steps + 1):
            den = 1 - e * w
            if abs(den) <= 1e-15 * (1 + abs(e * w)):
                ok = False
                break
            w = (w + e * A) / den
            worst = max(worst, abs(w - complex(ref(m * e))))
        errors.append(worst if ok else math.inf)
        flagged.append(not ok)
    return LimitStudy(eps, errors, fit_order(eps, errors), (0.0, float(T)), flagged,
                      extra={"A_tilde": A, "w0": w0})


def fu5jh4_residual(w_prev, w_next, eps, k) -> float:
    """Defect of the scaled difference relation between consecutive samples."""
    s, c, d = jacobi_sn_cn_dn(eps, k)
    s2 = s * s
    lhs = (w_next - w_prev) ** 2 / s2
    rhs = k * k * w_next**2 * w_prev**2 + (2 * c * d - 2) / s2 * w_next * w_prev + 1
    return abs(lhs - rhs)


def coefficient_limit(eps, k) -> complex:
    """(2 cn dn - 2)/sn^2, which tends to -(1 + k^2)."""
    s, c, d = jacobi_sn_cn_dn(eps, k)
    return (2 * c * d - 2) / (s * s)


def _elliptic_rhs(k):
    k2 = k * k

    def rhs(w):
        return (k2 * w * w - 1) * (w * w - 1)

    def rhs_prime(w):
        return 2 * k2 * w * (w * w - 1) + 2 * w * (k2 * w * w - 1)

    return rhs, rhs_prime


def qrt_limit_study(k, eps_list, T: float, C0) -> LimitStudy:
    """Exact sn samples of the scaled symmetric QRT map against the limit ODE.

    The samples ``w_m = sn(m eps + C0, k)`` satisfy the scaled relation
    exactly, so ``extra['relation_residual']`` is the per-eps defect of that
    relation. The error column compares the samples with an RK4 solution of
    ``(w')^2 = (k^2 w^2 - 1)(w^2 - 1)`` taken with step ``h = eps`` in
    first-order form, so the fitted order is that of the integrator.
    """
    k = complex(k)
    C0 = complex(C0)
    eps = _eps_sorted(eps_list)
    rhs, rhs_prime = _elliptic_rhs(k)
    errors, relres, exact_err = [], [], []
    blowup = False
    for e in eps:
        steps = math.ceil(T / e - 1e-9)
        samples = [jacobi_sn_cn_dn(m * e + C0, k)[0] for m in range(steps + 1)]
        if any(is_inf(s) for s in samples):
            raise BlowUpError("sn pole inside the window")
        relres.append(max(fu5jh4_residual(a, b, e, k) for a, b in zip(samples, samples[1:])))
        hint = (samples[1] - samples[0]) / e
        field_ = SqrtField(rhs, rhs_prime, samples[0], hint)
        traj = ode_solve(field_, 0.0, samples[0], steps * e, e)
        if traj.blowup:
            blowup = True
            errors.append(math.inf)
            continue
        errors.append(max(abs(complex(traj.w[m]) - samples[m]) for m in range(steps + 1)))
        # the samples are definitionally sn(t + C0)
        exact_err.append(0.0)
    return LimitStudy(eps, errors, fit_order(eps, errors), (0.0, float(T)), [], blowup,
                      extra={"relation_residual": relres, "k": k, "C0": C0})


def sn_system(k):
    """Vector field of (sn, cn, dn) as functions of t."""
    k2 = complex(k) ** 2

    def f(t, y):
        s, c, d = y
        return np.array([c * d, -s * d, -k2 * s * c])

    return f


def rk_order_study(k, C0, T: float, h_list) -> LimitStudy:
    """RK4 on the (sn, cn, dn) system against direct evaluation of sn."""
    hs = _eps_sorted(h_list)
    y0 = np.array(jacobi_sn_cn_dn(C0, k), dtype=complex)
    errors = []
    for h in hs:
        traj = ode_solve(sn_system(k), 0.0, y0, T, h)
        err = max(abs(traj.w[i][0] - jacobi_sn_cn_dn(traj.t[i] + C0, k)[0]) for i in range(len(traj.t)))
        errors.append(float(err))
    return LimitStudy(hs, errors, fit_order(hs, errors), (0.0, float(T)), extra={"k": complex(k)})


def _quadratic_roots(a, b, c):
    disc = cmath.sqrt(b * b - 4 * a * c)
    q = -(b + disc) / 2 if abs(b + disc) >= abs(b - disc) else -(b - disc) / 2
    if q == 0:
        return 0j, 0j
    return q / a, c / q


def degenerate_limit_study(a_tau, eps_list, f0=0.0, T: float = 1.0, tau2=1.0,
                           h_ref: Optional[float] = None) -> LimitStudy:
    """Scaled degenerate symmetric map against ``(w')^2 = c (w^2 - 1/tau2^2)``.

    Here ``a_tau = a tau2^2`` and ``c = -a_tau``. With spacing eps the
    relation ``(f' - f)^2 = eps^2 c (f' f - 1/tau2^2)`` is a quadratic for
    the next value f'. The first step takes the root nearest ``f0``; later
    steps take the root nearest the linear extrapolation ``2 f_m - f_{m-1}``.
    Steps where both roots are equally near are listed in
    ``extra['ambiguous_steps']`` (the '+' root is taken).
    """
    a_tau = complex(a_tau)
    if abs(a_tau) == 0:
        raise ValueError("a tau2^2 must be nonzero")
    c = -a_tau
    inv_t2 = 1 / complex(tau2) ** 2
    f0 = complex(f0)
    eps = _eps_sorted(eps_list)

    def rhs(w):
        return c * (w * w - inv_t2)

    def rhs_prime(w):
        return 2 * c * w

    errors, ambiguous = [], []
    discrete_runs = []
    for e in eps:
        steps = math.ceil(T / e - 1e-9)
        e2c = e * e * c
        vals = [f0]
        amb = []
        for m in range(steps):
            cur = vals[-1]
            r1, r2 = _quadratic_roots(1.0, -(2 + e2c) * cur, cur * cur + e2c * inv_t2)
            target = cur if m == 0 else 2 * cur - vals[-2]
            d1, d2 = abs(r1 - target), abs(r2 - target)
            if abs(d1 - d2) <= 1e-12 * (1 + abs(target)):
                amb.append(m)
                vals.append(r1 if (r1.real, r1.imag) >= (r2.real, r2.imag) else r2)
            else:
                vals.append(r1 if d1 < d2 else r2)
        discrete_runs.append(vals)
        ambiguous.append(amb)
    # reference: sign of the derivative from the finest run's first step
    finest = discrete_runs[-1]
    hint = (finest[1] - finest[0]) / eps[-1]
    t_end = max(math.ceil(T / e - 1e-9) * e for e in eps)
    field_ = SqrtField(rhs, rhs_prime, f0, hint)
    ref = ode_solve(field_, 0.0, f0, t_end, h_ref or min(eps) / 4)
    if ref.blowup:
        raise BlowUpError("reference solution blows up inside the window")
    for e, vals in zip(eps, discrete_runs):
        errors.append(max(abs(v - complex(ref(m * e))) for m, v in enumerate(vals)))
    max_dev = max(abs(v - f0) for vals in discrete_runs for v in vals)
    return LimitStudy(eps, errors, fit_order(eps, errors), (0.0, float(T)),
                      [bool(a) for a in ambiguous],
                      extra={"ambiguous_steps": ambiguous, "max_deviation_from_f0": max_dev})


def riccati_limit_eq10(delta, gamma0, T: float, eps_list) -> LimitStudy:
    """E10 -> worked Riccati factor -> canonical form -> Riccati limit study.

    The starting value of the canonical variable is ``T^-1(gamma0)`` for the
    canonicalizing map ``T``.
    """
    d = complex(delta)
    if abs(2 * d * d - 1) <= 1e-12:
        raise ValueError("2 delta^2 = 1 excluded")
    factor = eq10_worked_factor(d)
    A, Tmap = canonicalize_riccati(factor.coeffs)
    w0 = mobius_apply(Tmap.inverse(), complex(gamma0))
    study = riccati_limit_study(A, w0, T, eps_list)
    study.extra.update({"A": complex(A), "delta": d, "gamma0": complex(gamma0)})
    return study


def eps_geometric(first_exp: int, last_exp: int, base: float = 2.0) -> list:
    """``[base**-first_exp, ..., base**-last_exp]``."""
    return [base ** (-j) for j in range(first_exp, last_exp + 1)]
