"""Spinor Poisson transforms on real hyperbolic space, with the Clifford and special-function machinery they need."""

from .clifford import Multivector, Signature, euclidean, lorentzian
from .estimators import PoissonTransformer
from .poisson import (
    BoundaryDatum,
    c_closed,
    cfun_by_fatou,
    cfun_by_nbar,
    hardy_norm,
    hs_limit_eisenstein,
    inversion,
    lp_norm,
    poisson_kernel,
    poisson_transform,
    principal_series_action,
    scalar_components,
    spherical_closed_form,
    spherical_function,
)
from .quadrature import QuadratureRule, product_rule, section_k
from .special import c_simple, c_tau_closed, gamma_complex, gamma_lambda_const, hyp2f1, jacobi_phi
from .spin import a_t, iwasawa, so_lift, vector_rep
from .spinor import branching

__version__ = "0.1.0"
