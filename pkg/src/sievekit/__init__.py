"""sievekit: sieve-theoretic special functions and weighted almost-prime bounds.

Subpackages by role:

* dde       -- fixed-step retarded-DDE engine with dense tables
* buchstab  -- the Buchstab function w(u)
* dhr       -- Diamond-Halberstam-Richert sieve pair F_k/f_k, sigma_k, beta_k
* bound     -- weighted-sieve bound N(u,v;k), comparison value, (u,v) search
* tuples    -- integer linear k-tuples: admissibility, normalization, scanning
* cli       -- command-line front end
"""

from .backend import name as backend_name
from .buchstab import buchstab_on_segment, buchstab_w
from .constants import EULER_GAMMA, EXP_GAMMA, EXP_NEG_GAMMA
from .dde import (
    DEFAULT_STEP,
    DelayProblem,
    GridSpec,
    InitialSegment,
    SolutionTable,
    load_table,
    query,
    save_table,
    solve_coupled,
    solve_dde,
)
from .errors import (
    AdmissibilityError,
    CalibrationError,
    ConfigurationError,
    DomainError,
    EvaluationError,
    NumericOverflowError,
    ParameterError,
    ResourceError,
    SievekitError,
    TableFormatError,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError",
    "CalibrationError",
    "ConfigurationError",
    "DEFAULT_STEP",
    "DelayProblem",
    "DomainError",
    "EULER_GAMMA",
    "EXP_GAMMA",
    "EXP_NEG_GAMMA",
    "EvaluationError",
    "GridSpec",
    "InitialSegment",
    "NumericOverflowError",
    "ParameterError",
    "ResourceError",
    "SievekitError",
    "SolutionTable",
    "TableFormatError",
    "backend_name",
    "buchstab_on_segment",
    "buchstab_w",
    "load_table",
    "query",
    "save_table",
    "solve_coupled",
    "solve_dde",
    "__version__",
]
