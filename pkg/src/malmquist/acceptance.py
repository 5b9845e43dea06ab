"""Acceptance suite shared by ``malmquist verify`` and the test-suite.

Every check returns a :class:`CriterionResult`; tolerances are fixed here
and never loosened by callers.
"""
from __future__ import annotations

import cmath
import math
import time
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import catalog as cat
from .continuum import eps_geometric, qrt_limit_study, riccati_limit_study, rk_order_study
from .elliptic import jacobi_sn_cn_dn, sn_addition, sn_series5
from .numkit import is_inf
from .orbit import BranchPolicy, h_substitution_chain, iterate, orbit_residual
from .qrt import (Biquadratic, QRTPencil, SymmetricQRTParams, exact_symmetric_orbit, fit_biquadratic,
                  parametrize_symmetric, qrt_invariant, qrt_step_general, qrt_step_symmetric)
from .riccati import RiccatiCoefficients, canonicalize_riccati, conjugation_defect

ETA = cmath.exp(2j * math.pi / 3)
GENERIC_F0 = 0.3 + 0.2j
K_GRID = (0.0, 0.2, 0.5, 0.8, 0.3 + 0.1j)
SEED = 20240611


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d} {self.name}: {self.detail}"


def _catalog_cases():
    cases = [("E9", {}), ("E10", {"delta": 0.3}), ("E11", {}), ("E12", {"kappa": 2}), ("E13", {}),
             ("E14", {"eta": ETA}), ("E15", {}), ("E16", {}), ("E18", {})]
    cases += [("E17", s.params) for s in cat.solve_constraints("E17")]
    cases += [("E19", s.params) for s in cat.solve_constraints("E19")]
    return cases


def criterion_1():
    worst, worst_id = 0.0, ""
    for eid, params in _catalog_cases():
        eq = cat.catalog_get(eid, params)
        orb = iterate(eq, GENERIC_F0, 50, BranchPolicy.nearest())
        r = orbit_residual(eq, orb)
        if len(orb) < 51:
            return False, f"{eid} orbit terminated early"
        if r > worst:
            worst, worst_id = r, eid
    return worst < 1e-8, f"max relative residual {worst:.2e} ({worst_id}) over {len(_catalog_cases())} cases < 1e-8"


def bounded_pencils(count: int = 5, seed: int = SEED, steps: int = 100, bound: float = 1e3):
    """Random real pencils whose orbit from (0.3, 0.7) stays bounded."""
    rng = np.random.default_rng(seed)
    found = []
    while len(found) < count:
        P = QRTPencil(rng.normal(size=(3, 3)), rng.normal(size=(3, 3)))
        x, y = 0.3, 0.7
        ok = True
        for _ in range(steps):
            x, y = qrt_step_general(P, x, y)
            if is_inf(x) or is_inf(y) or max(abs(x), abs(y)) > bound:
                ok = False
                break
        if ok:
            found.append(P)
    return found


def criterion_2():
    C, _ = cat.associated_curve("E12", {"kappa": 2})
    eq = cat.catalog_get("E12", {"kappa": 2})
    w = [3 + 0j, cmath.sqrt(eq.R(3))]
    for _ in range(100):
        w.append(qrt_step_symmetric(C, w[-2], w[-1]))
    sym_drift = max(C.relative_residual(a, b) for a, b in zip(w, w[1:]))
    gen_drift = 0.0
    for P in bounded_pencils():
        x, y = 0.3, 0.7
        K0 = qrt_invariant(P, x, y)
        for _ in range(100):
            x, y = qrt_step_general(P, x, y)
            gen_drift = max(gen_drift, abs(qrt_invariant(P, x, y) - K0) / (1 + abs(K0)))
    ok = sym_drift < 1e-8 and gen_drift < 1e-8
    return ok, f"symmetric drift {sym_drift:.2e}, pencil K drift {gen_drift:.2e} (5 cases) < 1e-8"


def criterion_3():
    k, eps = 0.5, 0.3
    params = SymmetricQRTParams.from_elliptic(k, eps)
    k2, eps2 = parametrize_symmetric(params)
    k_ok = min(abs(k2 - k), abs(k2 - 1 / k)) < 1e-9
    d = abs(jacobi_sn_cn_dn(eps2, k2)[0] ** 2 - jacobi_sn_cn_dn(eps, k)[0] ** 2)
    orb = exact_symmetric_orbit(k, eps, 0.1, 50)
    C = params.curve()
    res = max(abs(C(a, b)) for a, b in zip(orb.values, orb.values[1:]))
    ok = k_ok and d < 1e-9 and res < 1e-8
    return ok, f"k' = {k2.real:.12g}, |sn^2 eps' - sn^2 eps| = {d:.2e} < 1e-9, orbit residual {res:.2e} < 1e-8"


def criterion_4():
    grid = np.linspace(-1, 1, 20)
    ident = 0.0
    for k in K_GRID:
        for a in grid:
            for b in grid:
                s, c, d = jacobi_sn_cn_dn(complex(a, b), k)
                ident = max(ident, abs(s * s + c * c - 1), abs(d * d + k * k * s * s - 1))
    ratios = []
    for k in K_GRID:
        eps = 0.1
        r1 = abs(jacobi_sn_cn_dn(eps, k)[0] - sn_series5(eps, k))
        r2 = abs(jacobi_sn_cn_dn(eps / 2, k)[0] - sn_series5(eps / 2, k))
        ratios.append(r1 / r2)
    lo, hi = 2**6 * 0.7, 2**7 * 1.3
    rng = np.random.default_rng(SEED)
    add = 0.0
    count = 0
    while count < 50:
        u = complex(*rng.uniform(-1, 1, 2))
        e = complex(*rng.uniform(-1, 1, 2))
        k = K_GRID[int(rng.integers(len(K_GRID)))]
        try:
            v = sn_addition(u, e, k)
        except ValueError:
            continue
        add = max(add, abs(v - jacobi_sn_cn_dn(u + e, k)[0]))
        count += 1
    ok = ident < 1e-10 and all(lo <= r <= hi for r in ratios) and add < 1e-9
    return ok, (f"identity defect {ident:.2e} < 1e-10, series ratios "
                f"[{min(ratios):.1f}, {max(ratios):.1f}] within [{lo:.1f}, {hi:.1f}], addition {add:.2e} < 1e-9")


def criterion_5():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    done = 0
    while done < 100:
        z = rng.normal(size=6)
        try:
            b = RiccatiCoefficients(complex(z[0], z[1]), complex(z[2], z[3]), complex(z[4], z[5]))
            A, T = canonicalize_riccati(b)
        except ValueError:
            continue
        worst = max(worst, conjugation_defect(b, A, T))
        done += 1
    A, _ = canonicalize_riccati(RiccatiCoefficients(2, 1, 1))
    ok = worst < 1e-10 and abs(A + 5 / 9) < 1e-12
    return ok, f"conjugation defect {worst:.2e} < 1e-10 (100 cases), A(2,1,1) = {A.real:.15g}"


def criterion_6():
    eps = eps_geometric(4, 10)
    orders = {}
    for At in (1, 1j, 1 + 1j):
        orders[At] = riccati_limit_study(At, 0, 0.8, eps).fitted_order
    exact = riccati_limit_study(0, 1, 0.5, eps)
    zero_err = max(exact.errors)
    q = qrt_limit_study(0.5, [0.3, 0.2, 0.1], 1.0, 0.1)
    rel = max(q.extra["relation_residual"])
    rk = rk_order_study(0.5, 0.1, 2.0, eps_geometric(2, 6)).fitted_order
    band = all(0.85 <= o <= 1.15 for o in orders.values())
    ok = band and zero_err < 1e-12 and rel < 1e-8 and 3.7 <= rk <= 4.3
    ords = ", ".join(f"{o:.3f}" for o in orders.values())
    return ok, (f"Riccati orders [{ords}] in [0.85, 1.15]: {band}; A=0 error {zero_err:.2e} < 1e-12; "
                f"relation residual {rel:.2e} < 1e-8; RK order {rk:.3f} in [3.7, 4.3]")


def criterion_7():
    e17m = [s.params["kappa1"] for s in cat.solve_constraints("E17", theta=-1)]
    e17p = [s for s in cat.solve_constraints("E17", theta=1)]
    target = math.sqrt(8)
    ok_m = (len(e17m) == 2 and all(abs(abs(k) - target) < 1e-12 and abs(k.imag) < 1e-12 for k in e17m)
            and max(abs(cat.e17_quartic(k, -1)) for k in e17m) < 1e-12)
    sq = [s.params["kappa1"] ** 2 for s in e17p]
    want = [2 + 2j * math.sqrt(3), 2 - 2j * math.sqrt(3)]
    ok_p = (len(e17p) == 4 and all(min(abs(v - w) for w in want) < 1e-12 for v in sq)
            and max(s.residual for s in e17p) < 1e-12)
    e19 = cat.solve_constraints("E19")
    res19 = max(s.residual for s in e19)
    excl = all(min(abs(s.params["delta"] - b) for b in (0, 1, -1, 1j, -1j)) > 1e-9 for s in e19)
    ok = ok_m and ok_p and len(e19) == 6 and res19 < 1e-10 and excl
    return ok, (f"E17 theta=-1 {len(e17m)} roots |k1|=2sqrt2: {ok_m}; theta=1 {len(e17p)} roots: {ok_p}; "
                f"E19 {len(e19)} roots, max residual {res19:.2e} < 1e-10")


def criterion_8():
    eq = cat.catalog_get("E14", {"eta": ETA})
    orb = iterate(eq, GENERIC_F0, 30, BranchPolicy.nearest())
    chain = h_substitution_chain(orb, ETA)
    return chain.curve_residual < 1e-8, f"H-curve residual {chain.curve_residual:.2e} < 1e-8 over 30 steps"


FIT_SEEDS = (0.3 + 0.2j, 0.7 - 0.1j, 1.5 + 0.5j, -0.4 + 0.9j, 2.2 - 0.3j, 0.1 + 1.3j)


def pooled_pairs(eid, params, seeds=FIT_SEEDS, steps: int = 6):
    eq = cat.catalog_get(eid, params)
    pairs = []
    for f0 in seeds:
        pairs.extend(iterate(eq, f0, steps, BranchPolicy.nearest()).pairs())
    return pairs


def criterion_9():
    out = []
    ok = True
    for eid, params in (("E12", {"kappa": 2}), ("E9", {})):
        fit = fit_biquadratic(pooled_pairs(eid, params))
        ref, _ = cat.associated_curve(eid, params)
        dist = fit.curve.distance(ref)
        ok &= dist < 1e-8 and fit.gap > 1e-6
        out.append(f"{eid} distance {dist:.2e}, gap {fit.gap:.2e}")
    return ok, "; ".join(out) + " (need < 1e-8, > 1e-6)"


CRITERIA: list[tuple[int, str, Callable]] = [
    (1, "catalog residuals", criterion_1),
    (2, "QRT invariant conservation", criterion_2),
    (3, "parametrization round trip", criterion_3),
    (4, "elliptic identities", criterion_4),
    (5, "Riccati correspondence", criterion_5),
    (6, "continuum limits", criterion_6),
    (7, "constraint solvers", criterion_7),
    (8, "H-substitution chain", criterion_8),
    (9, "invariant fitting", criterion_9),
]

TIME_LIMIT = 60.0


def run_criterion(number: int) -> CriterionResult:
    for num, name, fn in CRITERIA:
        if num == number:
            t0 = time.perf_counter()
            try:
                ok, detail = fn()
            except Exception as exc:  # a crash is a failure, not an abort
                ok, detail = False, f"error: {type(exc).__name__}: {exc}"
            return CriterionResult(num, name, bool(ok), detail, time.perf_counter() - t0)
    raise KeyError(number)


def run_all() -> list[CriterionResult]:
    t0 = time.perf_counter()
    results = [run_criterion(num) for num, _, _ in CRITERIA]
    elapsed = time.perf_counter() - t0
    rest_ok = all(r.passed for r in results)
    results.append(CriterionResult(
        10, "end-to-end verify", rest_ok and elapsed < TIME_LIMIT,
        f"criteria 1-9 all pass: {rest_ok}; elapsed {elapsed:.1f} s < {TIME_LIMIT:.0f} s", elapsed))
    return results


def report(results) -> dict:
    return {
        "schema_version": "1",
        "passed": all(r.passed for r in results),
        "criteria": [asdict(r) for r in results],
    }
