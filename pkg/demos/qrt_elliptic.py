r"""
QRT maps and elliptic parametrization
-------------------------------------
Symmetric QRT maps step along a biquadratic curve by Vieta's rule. On the
canonical curve x^2y^2 + A(x^2+y^2) + 2Bxy + 1 = 0 the orbits are samples of
sqrt(k) sn(eps z + C, k). We go from (k, eps) to (A, B) and back, then
recover an invariant curve from orbit data alone.
"""
import cmath

import numpy as np

from malmquist import catalog as cat
from malmquist.elliptic import complete_K, jacobi_sn_cn_dn, sn_inverse
from malmquist.orbit import BranchPolicy, iterate
from malmquist.qrt import (QRTPencil, SymmetricQRTParams, exact_symmetric_orbit, fit_biquadratic,
                           parametrize_symmetric, qrt_invariant, qrt_step_general, qrt_step_symmetric)

#%%
# Elliptic functions first: K from the AGM and the two Pythagorean identities
# on a complex argument.
k = 0.5
print("K(0.5) =", complete_K(k).real)
s, c, d = jacobi_sn_cn_dn(0.4 + 0.7j, k)
print("sn^2 + cn^2 - 1 =", abs(s * s + c * c - 1), " dn^2 + k^2 sn^2 - 1 =", abs(d * d + k * k * s * s - 1))
print("sn(sn^-1(1.7)) =", jacobi_sn_cn_dn(sn_inverse(1.7, k), k)[0])

#%%
# Forward map (k, eps) -> (A, B) and its inverse.
params = SymmetricQRTParams.from_elliptic(0.5, 0.3)
print("A, B =", params.A, params.B)
print("recovered (k, eps) =", parametrize_symmetric(params))

#%%
# The exact orbit and the Vieta iteration agree step for step.
C = params.curve()
exact = exact_symmetric_orbit(0.5, 0.3, 0.1, 30).values
w = exact[:2]
for _ in range(28):
    w.append(qrt_step_symmetric(C, w[-2], w[-1]))
print("max |Vieta - sn| over 30 samples:", max(abs(a - b) for a, b in zip(w, exact)))

#%%
# A general (asymmetric) pencil conserves K = -(v C0 v)/(v C1 v).
rng = np.random.default_rng(1)
P = QRTPencil(rng.normal(size=(3, 3)), rng.normal(size=(3, 3)))
x, y = 0.3, 0.7
Ks = [qrt_invariant(P, x, y)]
for _ in range(20):
    x, y = qrt_step_general(P, x, y)
    Ks.append(qrt_invariant(P, x, y))
print("spread of K along 20 steps:", np.ptp(np.real(Ks)))

#%%
# Fitting: one orbit of a symmetric map lies on every curve of the pencil
# through it, so its pairs cannot pin the curve down. Pooling a few orbits
# of the same equation does.
pairs = []
e12 = cat.catalog_get("E12", {"kappa": 2})
for f0 in (0.3 + 0.2j, 0.7 - 0.1j, 1.5 + 0.5j):
    pairs += list(iterate(e12, f0, 6, BranchPolicy.nearest()).pairs())
fit = fit_biquadratic(pairs)
ref, _ = cat.associated_curve("E12", {"kappa": 2})
print("gap", fit.gap, "cosine distance to x^2y^2 - x^2 - y^2 + 4:", fit.curve.distance(ref))
print(np.round(fit.curve.C / fit.curve.C[0, 0], 12))
