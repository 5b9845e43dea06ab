import cmath
import json
import math

import jsonschema
import numpy as np
import pytest

from malmquist import catalog as cat
from malmquist.catalog import ConstraintError, CurveKind, EquationId
from malmquist.numkit import is_inf, ratmap_eval

ETA = cmath.exp(2j * math.pi / 3)

CATALOG_SCHEMA = {
    "type": "object",
    "required": ["id", "n", "params", "constraints", "curve"],
    "properties": {
        "id": {"type": "string", "pattern": "^E[0-9]+$"},
        "n": {"type": "integer", "minimum": 1},
        "params": {"type": "object", "additionalProperties": {
            "type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}},
        "constraints": {"type": "array", "items": {"type": "string"}},
        "curve": {"oneOf": [{"type": "null"}, {
            "type": "array", "minItems": 3, "maxItems": 3,
            "items": {"type": "array", "minItems": 3, "maxItems": 3,
                      "items": {"type": "array", "minItems": 2, "maxItems": 2}}}]},
    },
}


def admissible():
    out = [("E9", {}), ("E10", {"delta": 0.3}), ("E11", {}), ("E12", {"kappa": 2}), ("E13", {}),
           ("E14", {"eta": ETA}), ("E15", {}), ("E16", {}), ("E18", {}),
           ("E6", {"a1": 2, "a2": 1}), ("E7", {"b1": 2, "b2": 1, "b3": 1})]
    out += [("E17", s.params) for s in cat.solve_constraints("E17")]
    out += [("E19", s.params) for s in cat.solve_constraints("E19")]
    return out


def test_ids_and_parse():
    assert EquationId.parse("e12") is EquationId.E12
    assert EquationId.parse("RICCATI") is EquationId.RICCATI
    assert len(cat.catalog_ids()) == 13
    with pytest.raises(KeyError):
        EquationId.parse("E99")


def test_constraint_examples():
    assert cat.catalog_get("E14", {"eta": ETA}).n == 2
    with pytest.raises(ConstraintError, match="eta"):
        cat.catalog_get("E14", {"eta": 1})
    cat.catalog_get("E12", {"kappa": 2})
    with pytest.raises(ConstraintError, match="kappa"):
        cat.catalog_get("E12", {"kappa": 1})
    with pytest.raises(ConstraintError, match="delta"):
        cat.catalog_get("E19", {"delta": 1})
    assert cat.constraint_residual("E19", {"delta": 1}) == 0


def test_missing_and_unknown_params():
    with pytest.raises(ConstraintError, match="missing"):
        cat.catalog_get("E12", {})
    with pytest.raises(ConstraintError, match="unknown"):
        cat.catalog_get("E9", {"kappa": 2})


def test_e10_exclusions():
    with pytest.raises(ConstraintError):
        cat.catalog_get("E10", {"delta": 1})
    with pytest.raises(ConstraintError, match="2 delta"):
        cat.catalog_get("E10", {"delta": 1 / math.sqrt(2)})


@pytest.mark.parametrize("eid,params", admissible())
def test_registered_instances(eid, params):
    eq = cat.catalog_get(eid, params)
    assert cat.constraint_residual(eid, eq.params) < 1e-9
    jsonschema.validate(eq.to_json(), CATALOG_SCHEMA)
    json.dumps(eq.to_json())


def test_deterministic():
    a = cat.catalog_get("E17", cat.solve_constraints("E17")[0].params)
    b = cat.catalog_get("E17", cat.solve_constraints("E17")[0].params)
    assert np.array_equal(a.R.num.coeffs, b.R.num.coeffs)
    assert np.array_equal(a.R.den.coeffs, b.R.den.coeffs)


def test_R_formulas():
    z = 0.37 - 0.21j
    eq = cat.catalog_get("E12", {"kappa": 2})
    assert abs(ratmap_eval(eq.R, 3) - 5 / 8) < 1e-15
    assert abs(ratmap_eval(cat.catalog_get("E13").R, z) - (1 - z**-3)) < 1e-12
    d = 0.3
    want = 1 - ((d * z - 1) / (z - d)) ** 2
    assert abs(ratmap_eval(cat.catalog_get("E10", {"delta": d}).R, z) - want) < 1e-12
    assert abs(ratmap_eval(cat.catalog_get("E11").R, z) - (1 - ((z + 3) / (z - 1)) ** 2)) < 1e-12


def test_constraint_residual_examples():
    assert cat.constraint_residual("E19", {"delta": 1}) == 0
    assert abs(cat.e17_quartic(math.sqrt(8), -1)) < 1e-12
    k1 = cmath.sqrt(2 + 2j * math.sqrt(3))
    assert abs(cat.e17_quartic(k1, 1)) < 1e-12


def test_solve_e17():
    sols = cat.solve_constraints("E17", theta=-1)
    vals = sorted(s.params["kappa1"].real for s in sols)
    assert np.allclose(vals, [-2 * math.sqrt(2), 2 * math.sqrt(2)], atol=1e-12)
    sq = [s.params["kappa1"] ** 2 for s in cat.solve_constraints("E17", theta=1)]
    for v in sq:
        assert min(abs(v - (2 + 2j * math.sqrt(3))), abs(v - (2 - 2j * math.sqrt(3)))) < 1e-12


def test_solve_e17_excluded_listed():
    sols = cat.solve_constraints("E17", theta=-1, include_excluded=True)
    assert sum(s.excluded for s in sols) == 2


def test_solve_e19():
    sols = cat.solve_constraints("E19")
    assert len(sols) == 6
    for s in sols:
        d = s.params["delta"]
        assert abs(8 * d**5 * (d * d + 1) - (d + 1) ** 4) < 1e-10
        eq = cat.catalog_get("E19", s.params)
        # leading factor of R is the scale (1/2)(1+d)^2/(1+d^2)
        assert abs(eq.R.num.coeffs[-1] / eq.R.den.coeffs[-1] - 0.5 * (1 + d) ** 2 / (1 + d * d)) < 1e-12
    with_excl = cat.solve_constraints("E19", include_excluded=True)
    assert any(s.excluded and abs(s.params["delta"] - 1) < 1e-12 for s in with_excl)


def test_solve_other_rejected():
    with pytest.raises(LookupError, match="no constraint"):
        cat.solve_constraints("E9")


def test_associated_curves():
    C, kind = cat.associated_curve("E9")
    assert kind is CurveKind.SELF and abs(C(0.6, 0.8)) < 1e-15
    C, _ = cat.associated_curve("E12", {"kappa": 2})
    assert C.C[0, 0] != 0 and abs(C.C[2, 2] / C.C[0, 0] - 4) < 1e-15
    C, kind = cat.associated_curve("E14", {"eta": ETA})
    assert kind is CurveKind.H_CHAIN
    assert abs(C.C[2, 2] / C.C[0, 0] + ETA**2) < 1e-15
    for eid in ("E10", "E11", "E13", "E18"):
        with pytest.raises(LookupError):
            cat.associated_curve(eid)


@pytest.mark.parametrize("eid,params", [p for p in admissible()
                                        if p[0] in ("E9", "E12", "E15", "E16", "E17", "E19")])
def test_self_curves_match_R(eid, params):
    eq = cat.catalog_get(eid, params)
    C, _ = cat.associated_curve(eid, eq.params)
    for f in (0.3 + 0.2j, -1.4 + 0.5j, 2.2j):
        r = ratmap_eval(eq.R, f)
        y = cmath.sqrt(r)
        assert C.relative_residual(f, y) < 1e-12


def test_exact_e9():
    sol = cat.exact_solution("E9")
    vals, flags = sol.sample(8)
    assert np.allclose(vals, [0, 1, 0, -1, 0, 1, 0, -1], atol=1e-15)
    vals, _ = cat.exact_solution("E9", c=0.3).sample(20)
    assert max(abs(b * b - (1 - a * a)) for a, b in zip(vals, vals[1:])) < 1e-14


def test_exact_e12():
    params = {"kappa": 2}
    vals, flags = cat.exact_solution("E12", params, f0=3).sample(50)
    assert abs(vals[0] - 3) < 1e-10
    eq = cat.catalog_get("E12", params)
    C, _ = cat.associated_curve("E12", params)
    worst = 0.0
    for m in range(49):
        if flags[m] or flags[m + 1]:
            continue
        r = ratmap_eval(eq.R, vals[m])
        worst = max(worst, abs(vals[m + 1] ** 2 - r) / (1 + abs(r)))
        assert C.relative_residual(vals[m], vals[m + 1]) < 1e-7
    assert worst < 1e-7


def test_exact_e12_pole_flagged():
    pipe = cat.e12_pipeline(2)
    from malmquist.elliptic import complete_K, _kprime
    from malmquist.numkit import mobius_apply
    # choose C so that sn(eps*1 + C) has a pole: G = inf -> F = alpha
    Kp = complete_K(_kprime(pipe.k))
    C = 1j * Kp - pipe.eps
    vals, flags = cat.exact_solution("E12", {"kappa": 2}, C=C).sample(3)
    # the sn pole maps to the finite value alpha under the Moebius map
    assert not flags[1] and abs(vals[1] - pipe.alpha) < 1e-6


def test_exact_e19_stub_and_others():
    d = cat.solve_constraints("E19")[0].params["delta"]
    form = cat.exact_solution("E19", {"delta": d})
    assert abs(form.modulus - 1 / d**2) < 1e-14
    assert abs(form.multiplier - 0.5 * (1 + d) ** 4 / d**4) < 1e-12
    with pytest.raises(LookupError, match="no constructor"):
        cat.exact_solution("E13")


def test_e12_pipeline_constants():
    pipe = cat.e12_pipeline(2)
    assert abs(pipe.alpha**4 - (pipe.kappa1**2 * pipe.kappa) ** 2) < 1e-12
    assert abs(pipe.A - 1) < 1e-15
    assert abs(pipe.B - 6) < 1e-12


def test_exact_e12_infinite_sample_flagged():
    from malmquist.elliptic import sn_inverse
    pipe = cat.e12_pipeline(2)
    # G = -beta is the pole of the Moebius map back to f
    C = sn_inverse(-pipe.beta / cmath.sqrt(pipe.k), pipe.k) - pipe.eps
    vals, flags = cat.exact_solution("E12", {"kappa": 2}, C=C).sample(3)
    assert flags[1] and is_inf(vals[1]) and not flags[0]
