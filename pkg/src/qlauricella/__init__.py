"""q-extended Srivastava-Daoust (generalized Lauricella) series: evaluation
and q-derivatives with respect to the parameters."""
from .errors import (
    DimensionMismatch,
    InvalidBase,
    NonConvergent,
    QLauricellaError,
    SchemaError,
    SingularPochhammer,
    SingularPrefactor,
    UnknownSuite,
    ZeroParameter,
    ZeroPoint,
)
from .horn import H3Params, h3_deriv_a, h3_deriv_b, h3_deriv_c, h3_spec
from .paramderiv import (
    ExpansionTerm,
    VerifyReport,
    eval_derivative_closed,
    eval_derivative_definitional,
    eval_term,
    expand_derivative,
    single_shift_reading,
    verify,
)
from .qcore import jackson_derivative, q_bracket, q_pochhammer, split_q_bracket
from .series import (
    Block,
    Diagnostic,
    EvalConfig,
    EvalResult,
    ParamRef,
    SeriesSpec,
    ShiftState,
    evaluate,
    omega,
    validate,
    variable_derivative,
    weighted_evaluate,
)

__version__ = "0.1.0"
