"""Registry of canonical first-order equations f(z+1)**n = R(f(z)).

Each entry knows its power ``n``, how to build ``R`` from named parameters,
which parameter relations must hold, and (where one exists) a biquadratic
curve relating consecutive values.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .elliptic import jacobi_sn_cn_dn, sn_inverse
from .numkit import INF, MobiusMap, Polynomial, RationalMap, is_inf, mobius_apply, poly_roots
from .qrt import Biquadratic, SymmetricQRTParams, parametrize_symmetric

CONSTRAINT_TOL = 1e-9
EXCLUSION_TOL = 1e-9


class EquationId(str, enum.Enum):
    LINEAR = "E6"
    RICCATI = "E7"
    E9 = "E9"
    E10 = "E10"
    E11 = "E11"
    E12 = "E12"
    E13 = "E13"
    E14 = "E14"
    E15 = "E15"
    E16 = "E16"
    E17 = "E17"
    E18 = "E18"
    E19 = "E19"

    @classmethod
    def parse(cls, text) -> "EquationId":
        if isinstance(text, cls):
            return text
        key = str(text).strip().upper()
        for member in cls:
            if key in (member.name, member.value):
                return member
        raise KeyError(f"unknown equation id {text!r}")


class CurveKind(str, enum.Enum):
    SELF = "SELF"          # relates (f, f_next)
    H_CHAIN = "H_CHAIN"    # relates (f_next, H)


class ConstraintError(ValueError):
    """Parameters violate a relation or exclusion of the equation."""


@dataclass(frozen=True)
class _Spec:
    n: int
    params: tuple
    formula: str
    constraints: tuple = ()
    hints: str = ""


_SPECS = {
    EquationId.LINEAR: _Spec(1, ("a1", "a2"), "f' = a1 f + a2", (), "a1 != 0"),
    EquationId.RICCATI: _Spec(1, ("b1", "b2", "b3"), "f' = (b1 f + b2)/(f + b3)",
                              ("b2 != b1*b3",), "b2 != b1 b3"),
    EquationId.E9: _Spec(2, (), "f'^2 = 1 - f^2"),
    EquationId.E10: _Spec(2, ("delta",), "f'^2 = 1 - ((delta f - 1)/(f - delta))^2",
                          ("delta != +-1", "2 delta^2 != 1"), "constant delta, delta^2 not in {1, 1/2}"),
    EquationId.E11: _Spec(2, (), "f'^2 = 1 - ((f + 3)/(f - 1))^2"),
    EquationId.E12: _Spec(2, ("kappa",), "f'^2 = (f^2 - kappa^2)/(f^2 - 1)",
                          ("kappa^2 not in {0, 1}",), "kappa^2 not in {0, 1}"),
    EquationId.E13: _Spec(3, (), "f'^3 = 1 - f^-3"),
    EquationId.E14: _Spec(2, ("eta",), "f'^2 = eta^2 (f^2 - 1)",
                          ("eta^3 = 1", "eta != 1"), "eta = exp:1/3 or exp:2/3"),
    EquationId.E15: _Spec(2, (), "f'^2 = 2 (1 - f^-2)"),
    EquationId.E16: _Spec(2, (), "f'^2 = (1 + f^2)/(1 - f^2)"),
    EquationId.E17: _Spec(2, ("theta", "kappa1"),
                          "f'^2 = theta (f^2 - kappa1 f + 1)/(f^2 + kappa1 f + 1)",
                          ("theta = +-1", "kappa1^2 (kappa1^2 - 4) = 2 (1 - theta) kappa1^2 - 8 (1 + theta)"),
                          "see `constants E17`"),
    EquationId.E18: _Spec(3, (), "f'^3 = 1 - f^3"),
    EquationId.E19: _Spec(2, ("delta",),
                          "f'^2 = (1/2) (1 + delta)^2/(1 + delta^2) (f - 1)(f - delta^2)/(f - delta)^2",
                          ("8 delta^5 (delta^2 + 1) - (delta + 1)^4 = 0", "delta not in {0, +-1, +-i}"),
                          "see `constants E19`"),
}

# relations recorded for reference only; they are not re-derived here
_METADATA = {
    EquationId.E17: {"coefficient_relations": "gamma1^2 = gamma2^2 = c^2 = 1"},
}


def equation_spec(eid) -> _Spec:
    return _SPECS[EquationId.parse(eid)]


def _near(z, target, tol=EXCLUSION_TOL) -> bool:
    return abs(z - target) <= tol * (1 + abs(target))


def e17_quartic(kappa1, theta) -> complex:
    k2 = kappa1 * kappa1
    return k2 * (k2 - 4) - 2 * (1 - theta) * k2 + 8 * (1 + theta)


def e19_polynomial() -> Polynomial:
    """8 d^7 + 8 d^5 - (d + 1)^4 in ascending coefficients."""
    return Polynomial([-1, -4, -6, -4, -1, 8, 0, 8])


def e19_scale(delta) -> complex:
    return 0.5 * (1 + delta) ** 2 / (1 + delta * delta)


def constraint_residual(eid, params: dict) -> float:
    """Magnitude of the defining parameter relation (0 if there is none)."""
    eid = EquationId.parse(eid)
    if eid is EquationId.E17:
        return abs(e17_quartic(complex(params["kappa1"]), complex(params["theta"])))
    if eid is EquationId.E19:
        d = complex(params["delta"])
        return abs(8 * d**5 * (d * d + 1) - (d + 1) ** 4)
    if eid is EquationId.E14:
        return abs(complex(params["eta"]) ** 3 - 1)
    return 0.0


def _build_R(eid: EquationId, p: dict) -> RationalMap:
    P = Polynomial
    if eid is EquationId.LINEAR:
        return RationalMap(P([p["a2"], p["a1"]]), P([1]))
    if eid is EquationId.RICCATI:
        return RationalMap(P([p["b2"], p["b1"]]), P([p["b3"], 1]))
    if eid is EquationId.E9:
        return RationalMap(P([1, 0, -1]), P([1]))
    if eid is EquationId.E10:
        d = p["delta"]
        return RationalMap(P([-(1 - d * d), 0, 1 - d * d]), P([d * d, -2 * d, 1]))
    if eid is EquationId.E11:
        return RationalMap(P([-8, -8]), P([1, -2, 1]))
    if eid is EquationId.E12:
        kap = p["kappa"]
        return RationalMap(P([-kap * kap, 0, 1]), P([-1, 0, 1]))
    if eid is EquationId.E13:
        return RationalMap(P([-1, 0, 0, 1]), P([0, 0, 0, 1]))
    if eid is EquationId.E14:
        e2 = p["eta"] ** 2
        return RationalMap(P([-e2, 0, e2]), P([1]))
    if eid is EquationId.E15:
        return RationalMap(P([-2, 0, 2]), P([0, 0, 1]))
    if eid is EquationId.E16:
        return RationalMap(P([1, 0, 1]), P([1, 0, -1]))
    if eid is EquationId.E17:
        th, k1 = p["theta"], p["kappa1"]
        return RationalMap(P([th, -th * k1, th]), P([1, k1, 1]))
    if eid is EquationId.E18:
        return RationalMap(P([1, 0, 0, -1]), P([1]))
    if eid is EquationId.E19:
        d = p["delta"]
        c = e19_scale(d)
        return RationalMap(P([c * d * d, -c * (1 + d * d), c]), P([d * d, -2 * d, 1]))
    raise KeyError(eid)


def _validate(eid: EquationId, p: dict) -> None:
    if eid is EquationId.LINEAR and p["a1"] == 0:
        raise ConstraintError("a1 != 0 violated (map is constant)")
    if eid is EquationId.RICCATI and abs(p["b2"] - p["b1"] * p["b3"]) <= 1e-14:
        raise ConstraintError("b2 != b1*b3 violated (degenerate Riccati map)")
    if eid is EquationId.E10:
        d = p["delta"]
        if _near(d * d, 1):
            raise ConstraintError("delta != +-1 violated")
        if _near(2 * d * d, 1):
            raise ConstraintError("2 delta^2 != 1 violated")
    if eid is EquationId.E12:
        k2 = p["kappa"] ** 2
        if _near(k2, 0) or _near(k2, 1):
            raise ConstraintError("kappa^2 not in {0, 1} violated")
    if eid is EquationId.E14:
        eta = p["eta"]
        if _near(eta, 1):
            raise ConstraintError("eta != 1 violated")
        if constraint_residual(eid, p) > CONSTRAINT_TOL:
            raise ConstraintError("eta^3 = 1 violated")
    if eid is EquationId.E17:
        th = p["theta"]
        if not (_near(th, 1) or _near(th, -1)):
            raise ConstraintError("theta = +-1 violated")
        if _near(p["kappa1"], 0):
            raise ConstraintError("kappa1 != 0 violated (R would be constant)")
        if constraint_residual(eid, p) > CONSTRAINT_TOL:
            raise ConstraintError(
                "kappa1^2 (kappa1^2 - 4) = 2 (1 - theta) kappa1^2 - 8 (1 + theta) violated")
    if eid is EquationId.E19:
        d = p["delta"]
        for bad in (0, 1, -1, 1j, -1j):
            if _near(d, bad):
                raise ConstraintError("delta not in {0, +-1, +-i} violated")
        if constraint_residual(eid, p) > CONSTRAINT_TOL:
            raise ConstraintError("8 delta^5 (delta^2 + 1) - (delta + 1)^4 = 0 violated")


@dataclass(frozen=True)
class CanonicalEquation:
    """A validated instance of one catalog entry."""

    id: EquationId
    n: int
    params: dict
    R: RationalMap
    constraints: tuple = ()
    metadata: dict = field(default_factory=dict)

    @property
    def tag(self) -> str:
        return f"({self.id.value[1:]})"

    @property
    def formula(self) -> str:
        return _SPECS[self.id].formula

    def curve(self) -> Optional[tuple[Biquadratic, CurveKind]]:
        try:
            return associated_curve(self.id, self.params)
        except LookupError:
            return None

    def to_json(self) -> dict:
        entry = self.curve()
        curve = None
        if entry is not None:
            curve = [[[float(c.real), float(c.imag)] for c in row] for row in entry[0].C]
        return {
            "id": self.id.value,
            "n": self.n,
            "params": {k: [float(complex(v).real), float(complex(v).imag)] for k, v in self.params.items()},
            "constraints": list(self.constraints),
            "curve": curve,
        }


def catalog_get(eid, params: Optional[dict] = None) -> CanonicalEquation:
    """Validate parameters and build the equation.

    Raises
    ------
    ConstraintError
        On a missing/unknown parameter or a violated relation; the message
        names the relation.
    """
    eid = EquationId.parse(eid)
    spec = _SPECS[eid]
    params = dict(params or {})
    unknown = set(params) - set(spec.params)
    if unknown:
        raise ConstraintError(f"unknown parameters for {eid.value}: {sorted(unknown)}")
    missing = [k for k in spec.params if k not in params]
    if missing:
        raise ConstraintError(f"missing parameters for {eid.value}: {missing}")
    p = {k: complex(params[k]) for k in spec.params}
    _validate(eid, p)
    try:
        R = _build_R(eid, p)
    except ValueError as exc:
        raise ConstraintError(str(exc)) from exc
    return CanonicalEquation(eid, spec.n, p, R, spec.constraints, dict(_METADATA.get(eid, {})))


def catalog_ids() -> list[EquationId]:
    return list(EquationId)


@dataclass(frozen=True)
class ConstraintSolution:
    params: dict
    residual: float
    excluded: bool = False
    note: str = ""


def solve_constraints(eid, theta=None, include_excluded: bool = False) -> list[ConstraintSolution]:
    """Admissible constants for E17 (kappa1 per theta) and E19 (delta).

    For E19 the known root ``delta = 1`` is divided out before the
    remaining sextic is solved; excluded values are only listed when
    ``include_excluded`` is set.
    """
    eid = EquationId.parse(eid)
    out: list[ConstraintSolution] = []
    if eid is EquationId.E17:
        thetas = (-1, 1) if theta is None else (int(round(complex(theta).real)),)
        for th in thetas:
            quartic = Polynomial([8 * (1 + th), 0, -4 - 2 * (1 - th), 0, 1])
            for r in poly_roots(quartic):
                if abs(r) < 1e-6:
                    if include_excluded:
                        out.append(ConstraintSolution({"theta": th, "kappa1": 0j}, 0.0, True,
                                                      "kappa1 = 0 makes R constant"))
                    continue
                if abs(r.real) < 1e-14 * abs(r):
                    r = complex(0.0, r.imag)
                if abs(r.imag) < 1e-14 * abs(r):
                    r = complex(r.real, 0.0)
                out.append(ConstraintSolution({"theta": th, "kappa1": r}, abs(e17_quartic(r, th))))
        return out
    if eid is EquationId.E19:
        p = e19_polynomial()
        q, rem = p.divmod(Polynomial([-1, 1]))
        if include_excluded:
            out.append(ConstraintSolution({"delta": 1 + 0j}, abs(p(1.0)), True,
                                          "delta = 1 is a root but excluded"))
        for r in poly_roots(q):
            # polish against the undeflated polynomial
            dp = p.derivative()
            for _ in range(3):
                r = r - p(r) / dp(r)
            bad = any(_near(r, b) for b in (0, 1, -1, 1j, -1j))
            if bad and not include_excluded:
                continue
            out.append(ConstraintSolution({"delta": complex(r)}, abs(p(r)), bad,
                                          "excluded value" if bad else ""))
        return out
    raise LookupError(f"no constraint for {eid.value}")


def _h_curve(eta) -> Biquadratic:
    return Biquadratic.from_terms({(2, 2): 1, (2, 0): -1, (0, 2): -1, (0, 0): -eta * eta})


def associated_curve(eid, params: Optional[dict] = None) -> tuple[Biquadratic, CurveKind]:
    """Biquadratic relation for an entry.

    SELF curves relate ``(x, y) = (f, f_next)``. The E14 curve is the
    H-chain relation in ``(x, y) = (f_next, H)``.

    Raises
    ------
    LookupError
        For entries without a registered curve.
    """
    eid = EquationId.parse(eid)
    p = {k: complex(v) for k, v in (params or {}).items()}
    T = Biquadratic.from_terms
    if eid is EquationId.E9:
        return T({(2, 0): 1, (0, 2): 1, (0, 0): -1}), CurveKind.SELF
    if eid is EquationId.E12:
        kap = p["kappa"]
        return T({(2, 2): 1, (2, 0): -1, (0, 2): -1, (0, 0): kap * kap}), CurveKind.SELF
    if eid is EquationId.E14:
        return _h_curve(p["eta"]), CurveKind.H_CHAIN
    if eid is EquationId.E15:
        return T({(2, 2): 1, (2, 0): -2, (0, 0): 2}), CurveKind.SELF
    if eid is EquationId.E16:
        return T({(2, 2): 1, (2, 0): 1, (0, 2): -1, (0, 0): 1}), CurveKind.SELF
    if eid is EquationId.E17:
        th, k1 = p["theta"], p["kappa1"]
        return T({(2, 2): 1, (1, 2): k1, (0, 2): 1, (2, 0): -th, (1, 0): th * k1, (0, 0): -th}), CurveKind.SELF
    if eid is EquationId.E19:
        d = p["delta"]
        c = e19_scale(d)
        return T({(2, 2): 1, (1, 2): -2 * d, (0, 2): d * d,
                  (2, 0): -c, (1, 0): c * (1 + d * d), (0, 0): -c * d * d}), CurveKind.SELF
    raise LookupError(f"no biquadratic registered for {eid.value}")


# exact solutions

@dataclass(frozen=True)
class LatticeSolution:
    """A solution sampled on the integer lattice z = start, start+1, ..."""

    func: Callable[[int], complex]
    description: str

    def __call__(self, z) -> complex:
        return self.func(z)

    def sample(self, m_count: int, start: int = 0) -> tuple[list, list]:
        values, flags = [], []
        for m in range(start, start + m_count):
            v = self.func(m)
            sing = is_inf(v) or abs(v) > 1e12
            values.append(INF if sing else complex(v))
            flags.append(bool(sing))
        return values, flags


@dataclass(frozen=True)
class NecessaryForm:
    """Recorded shape of solutions for which no constructor is available."""

    modulus: complex
    multiplier: complex
    description: str


@dataclass(frozen=True)
class E12Pipeline:
    """Intermediate constants of the E12 elliptic construction."""

    kappa: complex
    kappa1: complex
    alpha: complex
    beta: complex
    A: complex
    B: complex
    k: complex
    eps: complex
    C: complex
    T: MobiusMap


def e12_pipeline(kappa, f0=None, C=0.1, kappa1=1.0, sign: int = 1) -> E12Pipeline:
    """Constants mapping an sn orbit onto an E12 orbit.

    With ``F = kappa1 f`` the relation becomes
    ``F'^2 F^2 - kappa1^2 (F'^2 + F^2) + kappa1^4 kappa^2 = 0``. The map
    ``F = alpha (G - beta)/(G + beta)`` with ``alpha^2 = kappa1^2 kappa``
    and ``beta = 1`` sends it to the canonical symmetric curve with
    ``A = 1`` and ``B = 2 (kappa + 1)/(kappa - 1)``, which is then
    parametrized by ``G = sqrt(k) sn(eps z + C)``.

    If ``f0`` is given, ``C`` is chosen so that the orbit starts there.
    """
    kappa = complex(kappa)
    kappa1 = complex(kappa1)
    alpha = cmath.sqrt(kappa1 * kappa1 * kappa)
    beta = 1.0 + 0j
    T = MobiusMap(alpha, -alpha * beta, 1, beta)
    A = beta * beta
    B = 2 * beta * beta * (kappa + 1) / (kappa - 1)
    k, eps = parametrize_symmetric(SymmetricQRTParams(A, B))
    if sign < 0:
        eps = -eps
    if f0 is not None:
        G0 = mobius_apply(T.inverse(), kappa1 * complex(f0))
        if is_inf(G0):
            raise ValueError("f0 maps to a pole of the parametrization")
        C = sn_inverse(G0 / cmath.sqrt(k), k)
    return E12Pipeline(kappa, kappa1, alpha, beta, A, B, k, eps, complex(C), T)


def exact_solution(eid, params: Optional[dict] = None, **kw):
    """Known lattice solution for E9 and E12; a necessary-form record for E19.

    Parameters
    ----------
    eid : EquationId or str
    params : dict
        Equation parameters.
    **kw
        E9: ``c`` (phase, default 0).
        E12: ``f0`` or ``C``, plus ``sign`` choosing the direction.
    """
    eid = EquationId.parse(eid)
    if eid is EquationId.E9:
        c = complex(kw.get("c", 0.0))
        return LatticeSolution(lambda z: cmath.sin(math.pi * z / 2 + c), f"sin(pi z/2 + {c})")
    if eid is EquationId.E12:
        eq = catalog_get(eid, params)
        pipe = e12_pipeline(eq.params["kappa"], f0=kw.get("f0"), C=kw.get("C", 0.1),
                            kappa1=kw.get("kappa1", 1.0), sign=kw.get("sign", 1))
        root_k = cmath.sqrt(pipe.k)

        def f(z):
            s = jacobi_sn_cn_dn(pipe.eps * z + pipe.C, pipe.k)[0]
            G = INF if is_inf(s) else root_k * s
            F = mobius_apply(pipe.T, G)
            return INF if is_inf(F) else F / pipe.kappa1

        return LatticeSolution(f, "E12 via sn parametrization")
    if eid is EquationId.E19:
        eq = catalog_get(eid, params)
        d = eq.params["delta"]
        return NecessaryForm(1 / (d * d), 0.5 * (1 + d) ** 4 / d**4,
                             "f = sn(phi(z)) with phi'(z0+1)^2 = multiplier * phi'(z0)^2")
    raise LookupError(f"no constructor registered for {eid.value}")
