"""Logarithmic means, statistical limits and Tauberian conditions, computed on log scales."""

from .config import RunConfig
from .corpus import builtin_corpus, get
from .errors import (DomainError, DSLSyntaxError, HorizonError, HypothesisError,
                     IntervalError, LogTauberError, ToleranceError)
from .funcspec import FunctionSpec, evaluate, from_json, parse
from .harness import TheoremCase, classify, run_suite, run_theorem
from .lemmas import (build_chain, check_liminf_s_over_x, construct_bn, j_decomposition,
                     verify_lemma1, verify_lemma2, verify_lemma3, verify_lemma4)
from .logmean import integrate_weighted, log_mean, mean_curve, tau_function
from .statlimit import (density_profile, detect_ordinary_limit, detect_statistical_limit,
                        exceptional_measure)
from .tauber import (TauberConstant, check_hardy, check_landau, find_window, primitive,
                     slow_decrease_modulus, slow_oscillation_modulus)

__version__ = "0.1.0"

__all__ = [
    "RunConfig", "builtin_corpus", "get",
    "DomainError", "DSLSyntaxError", "HorizonError", "HypothesisError", "IntervalError",
    "LogTauberError", "ToleranceError",
    "FunctionSpec", "evaluate", "from_json", "parse",
    "TheoremCase", "classify", "run_suite", "run_theorem",
    "build_chain", "check_liminf_s_over_x", "construct_bn", "j_decomposition",
    "verify_lemma1", "verify_lemma2", "verify_lemma3", "verify_lemma4",
    "integrate_weighted", "log_mean", "mean_curve", "tau_function",
    "density_profile", "detect_ordinary_limit", "detect_statistical_limit", "exceptional_measure",
    "TauberConstant", "check_hardy", "check_landau", "find_window", "primitive",
    "slow_decrease_modulus", "slow_oscillation_modulus",
]
