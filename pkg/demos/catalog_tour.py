r"""
A tour of the equation catalog
------------------------------
Every entry is an autonomous equation ``f(z+1)**n = R(f(z))``. This script
builds a few of them, iterates orbits with the different branch policies,
and checks the orbits against the relations they should satisfy.
"""
import cmath
import math

import numpy as np

from malmquist import catalog as cat
from malmquist.orbit import BranchPolicy, h_substitution_chain, iterate, orbit_residual

#%%
# The registry lists thirteen entries. Parameters are validated on
# construction, so an excluded value such as kappa = 1 never produces an
# equation object.
for eid in cat.catalog_ids():
    spec = cat.equation_spec(eid)
    print(f"{eid.value:>4}  n={spec.n}  {spec.formula}")

try:
    cat.catalog_get("E12", {"kappa": 1})
except cat.ConstraintError as exc:
    print("rejected:", exc)

#%%
# f'^2 = 1 - f^2 has the sine solutions sin(pi z/2 + c). Pointwise iteration
# has to pick a square root at every step; the principal root gives a valid
# but different chain, while a fixed branch sequence follows the sine.
e9 = cat.catalog_get("E9")
principal = iterate(e9, 0, 8, BranchPolicy.principal())
sine = iterate(e9, 0, 8, BranchPolicy.fixed([0, 0, 1, 0, 0, 0, 1, 0]))
print("principal:", np.round(np.real(principal.values), 12))
print("sine     :", np.round(np.real(sine.values), 12))

#%%
# For generic starting values the nearest-prediction policy keeps the orbit
# smooth. The residual audit compares f_{m+1}^n with R(f_m).
e12 = cat.catalog_get("E12", {"kappa": 2})
orb = iterate(e12, 0.3 + 0.2j, 50, BranchPolicy.nearest())
print("E12 residual", orbit_residual(e12, orb))
print("E12 curve x^2y^2 - x^2 - y^2 + 4 drift",
      max(cat.associated_curve("E12", {"kappa": 2})[0].relative_residual(a, b) for a, b in orb.pairs()))

#%%
# E12 also has an elliptic closed form. Seeding the iteration with two
# exact samples makes the predictor follow the same branch as sn.
sol = cat.exact_solution("E12", {"kappa": 2}, f0=3)
exact, _ = sol.sample(22, start=-2)
tracked = iterate(e12, exact[2], 19, BranchPolicy.nearest(), history=exact[:2])
print("max |iterate - exact| =", max(abs(a - b) for a, b in zip(tracked.values, exact[2:])))

#%%
# Two entries carry algebraic constraints on their constants. E17 ties kappa1
# to theta, and E19 needs delta to be a root of a degree-7 polynomial that
# has the excluded root delta = 1.
for s in cat.solve_constraints("E17"):
    print("E17", s.params, f"residual {s.residual:.1e}")
for s in cat.solve_constraints("E19", include_excluded=True):
    print("E19 delta =", np.round(s.params["delta"], 10), "(excluded)" if s.excluded else "")

#%%
# E14 with eta a primitive cube root of unity. The substitution
# h^2 = (f + i eta)/(f - i eta), H = (h^2 + 1)/(2h) puts (f_next, H) on a
# biquadratic curve.
eta = cmath.exp(2j * math.pi / 3)
e14 = cat.catalog_get("E14", {"eta": eta})
chain = h_substitution_chain(iterate(e14, 0.3 + 0.2j, 30, BranchPolicy.nearest()), eta)
print("H-chain residual", chain.curve_residual)
