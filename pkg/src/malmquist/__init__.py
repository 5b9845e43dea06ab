"""Malmquist-type difference equations f(z+1)**n = R(f(z)).

Submodules
----------
numkit     polynomials, Moebius maps, rational maps
elliptic   Jacobi elliptic functions and their inverse
qrt        biquadratic curves and QRT maps
catalog    the canonical equation registry
orbit      lattice iteration with branch policies
riccati    difference Riccati equations and factorizations
continuum  continuum-limit studies
"""
from .catalog import CanonicalEquation, EquationId, catalog_get, catalog_ids
from .elliptic import complete_K, jacobi_sn_cn_dn, sn, sn_inverse
from .numkit import INF, MobiusMap, Polynomial, RationalMap
from .orbit import BranchPolicy, Orbit, iterate
from .qrt import Biquadratic, fit_biquadratic

__version__ = "0.1.0"

__all__ = [
    "INF", "Biquadratic", "BranchPolicy", "CanonicalEquation", "EquationId", "MobiusMap",
    "Orbit", "Polynomial", "RationalMap", "catalog_get", "catalog_ids", "complete_K",
    "fit_biquadratic", "iterate", "jacobi_sn_cn_dn", "sn", "sn_inverse",
]
