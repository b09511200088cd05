"""Greedy minimum-entropy coupling with certified entropy bounds."""

from .core import (
    DEFAULT_TOL,
    Coupling,
    Distribution,
    Instance,
    NumericMode,
    Tolerances,
    entropy,
    make_distribution,
    make_instance,
    prefix_sum,
    to_exact,
)
from .greedy import LOG2_E, bound_report, greedy_couple, lower_bound_certificate
from .majorization import is_strongly_majorized, majorizes, meet
from .majorizing_set import adversary, defeat_check, gprime, uniform, uniform_gap, uniform_greedy_state
from .oracle import compare_greedy_to_oracle, exact_mec
from .split import geom_entropy, split, split_entropy_bound, verify_split_strong_majorization

__version__ = "0.1.0"

__all__ = [
    "Coupling",
    "DEFAULT_TOL",
    "Distribution",
    "Instance",
    "LOG2_E",
    "NumericMode",
    "Tolerances",
    "adversary",
    "bound_report",
    "compare_greedy_to_oracle",
    "defeat_check",
    "entropy",
    "exact_mec",
    "geom_entropy",
    "gprime",
    "greedy_couple",
    "is_strongly_majorized",
    "lower_bound_certificate",
    "majorizes",
    "make_distribution",
    "make_instance",
    "meet",
    "prefix_sum",
    "split",
    "split_entropy_bound",
    "to_exact",
    "uniform",
    "uniform_gap",
    "uniform_greedy_state",
    "verify_split_strong_majorization",
]
