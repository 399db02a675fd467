"""Temporal here-and-there with constraints over finite traces.

Evaluate temporal constraint formulas on pairs of partial-valuation traces,
compute the stable traces of temporal linear-constraint programs, and
translate formulas into quantified first-order syntax with a finite
evaluator for cross-checking.
"""

from .constraints import (
    SolutionRelation,
    build_df,
    complement,
    membership,
    register_relation,
    terms_of,
)
from .equilibrium import (
    Conflict,
    GroundRule,
    SolveOptions,
    StratificationError,
    check_stable,
    ground,
    least_fixpoint,
    reduct,
    solve,
    solve_enumerate,
    solve_stratified,
)
from .kamp import (
    QHTInterpretation,
    correspond,
    export_fo,
    qht_is_equilibrium,
    qht_satisfies,
    st_translate,
    subst,
)
from .parser import (
    ParseError,
    parse_formula,
    parse_program,
    parse_trace,
    print_formula,
    print_program,
    print_trace,
)
from .semantics import (
    BooleanHTTrace,
    EntryLimitError,
    NonStrictAtomError,
    delta_embed,
    derived_oracle,
    is_equilibrium,
    satisfies,
    satisfies_strict,
    tht_satisfies,
)
from . import syntax
from .syntax import desugar, offset_span
from .trace import TRUE, HTcTrace, PartialValuation, Trace, leq, proper_weakenings, strictly_less

__all__ = [name for name in dir() if not name.startswith("_")]
