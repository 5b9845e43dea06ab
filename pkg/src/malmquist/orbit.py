"""Forward iteration of f(z+1)**n = R(f(z)) on the integer lattice.

Each step has ``n`` candidate values (the n-th roots of ``R(f)``); a
:class:`BranchPolicy` decides which one becomes the next iterate.
"""
from __future__ import annotations

import cmath
import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .catalog import CanonicalEquation, EquationId, associated_curve
from .numkit import INF, is_inf, ratmap_eval
from .qrt import biquadratic_eval

ORBIT_TOL = 1e-9
SCHEMA_VERSION = "1"


class IterationError(RuntimeError):
    pass


class BranchMode(str, enum.Enum):
    PRINCIPAL = "principal"
    NEAREST_PREDICTION = "nearest"
    FIXED_SEQUENCE = "fixed"


@dataclass(frozen=True)
class BranchPolicy:
    mode: BranchMode = BranchMode.PRINCIPAL
    sequence: tuple = ()

    @classmethod
    def principal(cls) -> "BranchPolicy":
        return cls(BranchMode.PRINCIPAL)

    @classmethod
    def nearest(cls) -> "BranchPolicy":
        return cls(BranchMode.NEAREST_PREDICTION)

    @classmethod
    def fixed(cls, seq: Sequence[int]) -> "BranchPolicy":
        return cls(BranchMode.FIXED_SEQUENCE, tuple(int(i) for i in seq))

    @classmethod
    def parse(cls, text: str) -> "BranchPolicy":
        """``principal``, ``nearest`` or ``fixed:i0,i1,...``."""
        text = text.strip().lower()
        if text == "principal":
            return cls.principal()
        if text in ("nearest", "nearest_prediction"):
            return cls.nearest()
        if text.startswith("fixed:"):
            return cls.fixed(int(t) for t in text[6:].split(",") if t.strip())
        raise ValueError(f"unknown branch policy {text!r}")


@dataclass(frozen=True)
class Orbit:
    """Lattice samples with per-step branch records.

    ``branches[m]`` is the root index used to go from ``values[m]`` to
    ``values[m+1]`` (-1 when the step landed on a pole or was forced).
    """

    values: list
    branches: list
    singular: list
    eq_id: Optional[EquationId] = None
    params: dict = field(default_factory=dict)
    terminated: bool = False

    def __post_init__(self):
        if not (len(self.values) == len(self.branches) + 1 == len(self.singular)):
            raise ValueError("inconsistent orbit lengths")

    def __len__(self) -> int:
        return len(self.values)

    def pairs(self):
        """Consecutive finite pairs ``(f_m, f_{m+1})``."""
        for m in range(len(self.values) - 1):
            if not (self.singular[m] or self.singular[m + 1]):
                yield self.values[m], self.values[m + 1]

    def to_json(self) -> dict:
        def enc(v):
            return None if is_inf(v) else [v.real, v.imag]

        return {
            "schema_version": SCHEMA_VERSION,
            "eq_id": self.eq_id.value if self.eq_id else None,
            "params": {k: [complex(v).real, complex(v).imag] for k, v in self.params.items()},
            "values": [enc(v) for v in self.values],
            "branches": list(self.branches),
            "singular": list(self.singular),
            "terminated": self.terminated,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Orbit":
        values = [INF if v is None else complex(v[0], v[1]) for v in doc["values"]]
        eq_id = EquationId.parse(doc["eq_id"]) if doc.get("eq_id") else None
        params = {k: complex(v[0], v[1]) for k, v in doc.get("params", {}).items()}
        return cls(values, list(doc["branches"]), list(doc["singular"]), eq_id, params,
                   bool(doc.get("terminated", False)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "re", "im", "branch", "singular"])
        for m, v in enumerate(self.values):
            branch = -1 if m == 0 else self.branches[m - 1]
            if is_inf(v):
                re, im = "inf", "0"
            else:
                re, im = format(v.real, ".17g"), format(v.imag, ".17g")
            w.writerow([m, re, im, branch, int(self.singular[m])])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, eq_id=None, params=None) -> "Orbit":
        rows = list(csv.DictReader(io.StringIO(text)))
        values = [complex(float(r["re"]), float(r["im"])) for r in rows]
        values = [INF if is_inf(v) else v for v in values]
        branches = [int(r["branch"]) for r in rows[1:]]
        singular = [bool(int(r["singular"])) for r in rows]
        eid = EquationId.parse(eq_id) if eq_id else None
        return cls(values, branches, singular, eid, dict(params or {}))


def nth_roots(w: complex, n: int) -> list[complex]:
    """The n-th roots of ``w``; index 0 is the principal root."""
    if w == 0:
        return [0j] * n
    r0 = w ** (1.0 / n) if n > 1 else w
    return [r0 * cmath.exp(2j * math.pi * j / n) for j in range(n)]


def _snap_zero(R, z: complex, value: complex) -> complex:
    # a value below the cancellation floor of the numerator is treated as 0,
    # otherwise the n-th root would amplify pure roundoff
    scale = sum(abs(c) * abs(z) ** i for i, c in enumerate(R.num.coeffs))
    den = abs(R.den(z))
    if den > 0 and abs(value) * den <= 8 * 2.220446049250313e-16 * scale:
        return 0j
    return value


def _prediction(history: list) -> Optional[complex]:
    tail = []
    for v in reversed(history):
        if is_inf(v):
            break
        tail.append(v)
        if len(tail) == 3:
            break
    if len(tail) >= 3:
        return 3 * tail[0] - 3 * tail[1] + tail[2]
    if len(tail) == 2:
        return 2 * tail[0] - tail[1]
    return None


def _choose(candidates: list, policy: BranchPolicy, history: list, step: int) -> int:
    if policy.mode is BranchMode.PRINCIPAL:
        return 0
    if policy.mode is BranchMode.FIXED_SEQUENCE:
        if step >= len(policy.sequence):
            raise IterationError("FIXED_SEQUENCE exhausted")
        idx = policy.sequence[step]
        if not 0 <= idx < len(candidates):
            raise IterationError(f"branch index {idx} out of range")
        return idx
    pred = _prediction(history)
    if pred is None:
        return 0
    return min(range(len(candidates)), key=lambda j: abs(candidates[j] - pred))


def iterate(eq: CanonicalEquation, f0, steps: int, policy: Optional[BranchPolicy] = None,
            history: Sequence[complex] = ()) -> Orbit:
    """Iterate ``f_{m+1}**n = R(f_m)`` from ``f0``.

    Parameters
    ----------
    eq : CanonicalEquation
    f0 : complex
        Finite starting value.
    steps : int
        Number of steps (the orbit has ``steps + 1`` values unless it
        terminates at a pole).
    policy : BranchPolicy
        Root selection rule; principal by default.
    history : sequence of complex
        Values preceding ``f0``, used only to seed the prediction of the
        nearest-prediction policy.

    Raises
    ------
    IterationError
        On an indeterminate evaluation of R or an exhausted fixed sequence.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    f0 = complex(f0)
    if not cmath.isfinite(f0):
        raise ValueError("f0 must be finite")
    policy = policy or BranchPolicy.principal()
    n = eq.n
    values = [f0]
    branches: list[int] = []
    singular = [False]
    past = [complex(h) for h in history] + [f0]
    terminated = False
    for step in range(steps):
        cur = values[-1]
        try:
            target = ratmap_eval(eq.R, cur)
        except ValueError as exc:
            raise IterationError(f"R indeterminate at step {step}: {exc}") from exc
        if is_inf(target):
            values.append(INF)
            branches.append(-1)
            singular.append(True)
            past.append(INF)
            if eq.R.degree > 0 and is_inf(eq.R.value_at_infinity()):
                terminated = True
                break
            continue
        if not is_inf(cur):
            target = _snap_zero(eq.R, cur, target)
        cands = nth_roots(target, n)
        j = _choose(cands, policy, past, step)
        values.append(complex(cands[j]))
        branches.append(j)
        singular.append(False)
        past.append(values[-1])
    return Orbit(values, branches, singular, eq.id, dict(eq.params), terminated)


def orbit_residual(eq: CanonicalEquation, orb: Orbit) -> float:
    """Max relative defect ``|f_{m+1}^n - R(f_m)| / (1 + |R(f_m)|)``."""
    worst = 0.0
    for a, b in orb.pairs():
        r = ratmap_eval(eq.R, a)
        if is_inf(r):
            continue
        worst = max(worst, abs(b**eq.n - r) / (1 + abs(r)))
    return worst


def curve_residual(eq: CanonicalEquation, orb: Orbit) -> float:
    """Max relative residual of orbit pairs on the SELF curve of ``eq``."""
    curve, _ = associated_curve(eq.id, eq.params)
    return max((curve.relative_residual(a, b) for a, b in orb.pairs()), default=0.0)


@dataclass(frozen=True)
class HChain:
    h: list
    H: list
    curve_residual: float


def h_substitution_chain(eq14_orbit: Orbit, eta) -> HChain:
    """Square-root substitution turning an E14 orbit into (f_next, H) pairs.

    ``h_m**2 = (f_m + i eta)/(f_m - i eta)`` with the sign of ``h_m`` kept
    continuous along the orbit, and ``H_m = (h_m**2 + 1)/(2 h_m)``.

    Raises
    ------
    ValueError
        If an iterate is infinite or equals ``+- i eta``.
    """
    eta = complex(eta)
    ieta = 1j * eta
    curve, _ = associated_curve(EquationId.E14, {"eta": eta})
    hs, Hs = [], []
    prev = None
    for f in eq14_orbit.values:
        if is_inf(f):
            raise ValueError("infinite iterate in H-chain")
        scale = 1 + abs(f)
        if abs(f - ieta) <= 1e-14 * scale:
            raise ValueError("iterate at branch point f = i eta")
        if abs(f + ieta) <= 1e-14 * scale:
            raise ValueError("iterate gives h = 0 (f = -i eta)")
        h = cmath.sqrt((f + ieta) / (f - ieta))
        if prev is not None and abs(-h - prev) < abs(h - prev):
            h = -h
        prev = h
        hs.append(h)
        Hs.append((h * h + 1) / (2 * h))
    vals = eq14_orbit.values
    resid = max((abs(biquadratic_eval(curve, vals[m + 1], Hs[m])) for m in range(len(vals) - 1)),
                default=0.0)
    return HChain(hs, Hs, resid)
