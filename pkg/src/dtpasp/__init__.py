"""Decision-theoretic probabilistic answer set programming: credal inference, strategy
optimisation by enumeration, and a compiled 3AMC solver."""
from .credal import CredalResult, query_probability
from .dtsolve import UtilityRange, UtilityReport, dtproblog_utility, strategy_utility
from .errors import (DecompositionError, DtpaspError, NotCompilableError, ParseError,
                     ProgramError, ResourceLimitError)
from .lang import GroundProgram, Program, ground, parse, parse_query
from .pipeline import Amc3Config, solve, solve_amc3
from .stable import answer_sets, project

__version__ = "0.1.0"

__all__ = ["CredalResult", "query_probability", "UtilityRange", "UtilityReport",
           "dtproblog_utility", "strategy_utility", "DecompositionError", "DtpaspError",
           "NotCompilableError", "ParseError", "ProgramError", "ResourceLimitError",
           "GroundProgram", "Program", "ground", "parse", "parse_query", "Amc3Config", "solve",
           "solve_amc3", "answer_sets", "project"]
