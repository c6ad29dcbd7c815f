"""q-classical orthogonal polynomials on q-quadratic lattices, with residual checks."""

from .errors import (
    ConfigError,
    ConvergenceError,
    DegeneracyError,
    DomainError,
    InconclusiveError,
    InconsistencyError,
    ParameterError,
    PoleError,
    QLatticeError,
    SingularWeightError,
    SolverError,
    StepError,
    SupportError,
)
from .families import (
    DEFAULT_PARAMS,
    FAMILIES,
    CoeffTriple,
    ContinuousSupport,
    DiscreteSupport,
    FamilySpec,
    al_salam_carlitz_1,
    al_salam_carlitz_2,
    askey_wilson,
    eigenvalue,
    family_eval,
    make_family,
    q_meixner,
    q_racah,
)
from .hypergeometric import SeriesSpec, eval_terminating, eval_truncated
from .lattice import (
    GridWindow,
    Lattice,
    QParam,
    alpha_q,
    delta_chain,
    delta_div,
    lattice_x,
    mean_op,
    nabla_chain,
    nabla_div,
    q_number,
    q_pochhammer,
    q_pochhammer_infinite,
    q_pochhammer_multi,
)
from .reports import CheckReport
from .rodrigues import RodriguesContext, delta_k_rodrigues_check, rodrigues_apply, rodrigues_poly

__version__ = "0.1.0"
