r"""
Continuum limits
----------------
With t = eps z the canonical Riccati step w' = (w + eps A)/(1 - eps w)
approaches the ODE w' = w^2 + A. The step is in fact the exact flow of that
ODE over time arctan(eps) (for A = 1), so the error is O(eps^2).
"""
import math

import numpy as np

from malmquist.continuum import (BlowUpError, coefficient_limit, degenerate_limit_study, eps_geometric,
                                 qrt_limit_study, riccati_limit_eq10, riccati_limit_study, rk_order_study)

#%%
# Riccati scheme against tan t.
eps = eps_geometric(4, 10)
study = riccati_limit_study(1, 0, 1.0, eps)
for e, err in zip(study.eps_list, study.errors):
    n = math.ceil(1.0 / e - 1e-9)
    closed = max(abs(math.tan(m * math.atan(e)) - math.tan(m * e)) for m in range(n + 1))
    print(f"eps = 2^{round(math.log2(e)):>3d}  error {err:.3e}  closed form {closed:.3e}")
print("fitted order", study.fitted_order)

#%%
# With A = 0 the scheme telescopes to w0/(1 - w0 m eps): no error at all.
print("A = 0 errors:", max(riccati_limit_study(0, 1, 0.5, eps).errors))

#%%
# tan blows up at pi/2, and the study refuses a window past it.
try:
    riccati_limit_study(1, 0, 2.0, eps)
except BlowUpError as exc:
    print("blow-up:", exc)

#%%
# The elliptic case: sn samples satisfy the discrete relation exactly, and
# its coefficient tends to -(1 + k^2).
q = qrt_limit_study(0.5, [0.3, 0.2, 0.1], 1.0, 0.1)
print("relation residuals", q.extra["relation_residual"])
for e in (1e-1, 1e-2, 1e-3):
    print(e, coefficient_limit(e, 0.5).real + 1.25)
print("RK4 reference order", rk_order_study(0.5, 0.1, 2.0, eps_geometric(2, 6)).fitted_order)

#%%
# Degenerate biquadratic: a quadratic step per lattice point, converging to a
# sine-type ODE.
deg = degenerate_limit_study(-1, eps_geometric(4, 9))
print("degenerate order", deg.fitted_order)

#%%
# The whole E10 pipeline: Riccati factor, canonical form, limit study.
e10 = riccati_limit_eq10(0.3, 0.4, 0.8, eps)
print("A =", e10.extra["A"], "order", e10.fitted_order)
