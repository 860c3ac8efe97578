"""Proportional-derivative calculus and self-adjoint second-order equations.

The package is organized in layers: gain pairs (:mod:`confode.gains`) define
the operator, :mod:`confode.confcalc` supplies the calculus built on it,
:mod:`confode.solver` integrates the second-order equations, and the theory
modules (:mod:`confode.structure`, :mod:`confode.oscillation`,
:mod:`confode.greens`) implement the structural results on top.  The CLI in
:mod:`confode.cli` drives configured runs that emit CSV, JSON, and figures.
"""

from .fields import DomainError, ScalarField, constant, from_callable, identity
from .gains import Alpha, KappaPair, custom_pair, make_pair, validate
from .confcalc import (
    DEFAULT_QUAD,
    ExpArgs,
    QuadratureConfig,
    QuadratureError,
    alpha_integral,
    dalpha,
    dalpha2,
    e0,
    exp_p,
    find_alpha_critical,
    geodesic,
    h1,
    h1_inverse,
    inner_product,
    special,
    special_field,
)
from .solver import (
    GeneralProblem,
    IVPSpec,
    SelfAdjointProblem,
    Trajectory,
    basis,
    lx_residual,
    solve_ivp,
    to_self_adjoint,
    wronskian,
)
from .structure import (
    cauchy_kernel,
    classify_recessive_dominant,
    polya_factors,
    riccati_from_solution,
    riccati_residual,
    solution_from_riccati,
    trench_factors,
    variation_of_constants,
    variation_of_parameters,
)
from .oscillation import (
    disconjugate,
    find_zeros,
    flw_scan,
    lyapunov_check,
    lyapunov_sharpness,
    picone1_residual,
    picone2_residual,
    quadratic_functional,
    roundabout_audit,
    sturm_compare,
)
from .greens import (
    BVPSpec,
    DegenerateBVPError,
    GreenKernel,
    apply_green,
    audit_green,
    green_cauchy,
    green_closed_form,
    green_periodic,
    green_phipsi,
    pi_star,
    solve_bvp,
)
from .expressions import Expression, ExpressionError, parse_expression

__version__ = "0.1.0"
