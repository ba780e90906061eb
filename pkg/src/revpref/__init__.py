"""Revealed-preference rationality toolkit."""

__version__ = "0.1.0"

from .afriat import AfriatSolution, evaluate_utility, solve_afriat
from .dataset import (
    Dataset,
    DatasetError,
    ExpenditureMatrix,
    Relation,
    ViolationWitness,
    check_e_acyclic,
    check_garp,
    cross_expenditure,
    dump_dataset,
    load_dataset,
    revealed_relation,
    transitive_closure,
)
from .estimators import CobbDouglasDemand, RationalityAnalyzer
from .indices import (
    CceiResult,
    MoneyPumpReport,
    VarianResult,
    ccei,
    ccei_bisection,
    efficiency_vector_acyclic,
    money_pump,
    varian_index,
)
from .instability import (
    Norm,
    PhiSolution,
    PhiSystem,
    build_phi_system,
    is_rationalizing_certificate,
    solve_phi,
)
from .lp import LinearProgram, LpOutcome, solve_lp
from .report import AnalysisReport, analyze

__all__ = [
    "AfriatSolution",
    "AnalysisReport",
    "CceiResult",
    "CobbDouglasDemand",
    "Dataset",
    "DatasetError",
    "ExpenditureMatrix",
    "LinearProgram",
    "LpOutcome",
    "MoneyPumpReport",
    "Norm",
    "PhiSolution",
    "PhiSystem",
    "RationalityAnalyzer",
    "Relation",
    "VarianResult",
    "ViolationWitness",
    "analyze",
    "build_phi_system",
    "ccei",
    "ccei_bisection",
    "check_e_acyclic",
    "check_garp",
    "cross_expenditure",
    "dump_dataset",
    "efficiency_vector_acyclic",
    "evaluate_utility",
    "is_rationalizing_certificate",
    "load_dataset",
    "money_pump",
    "revealed_relation",
    "solve_afriat",
    "solve_lp",
    "solve_phi",
    "transitive_closure",
    "varian_index",
]
