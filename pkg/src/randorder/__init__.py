"""Random-order online interval selection: algorithms, oracles, charging checks and bias extraction."""

from .charging import max_expected_charge, simulate_charging
from .engine import Algorithm1, exact_expectation, monte_carlo, run
from .errors import RandOrderError, VerificationFailed
from .extraction import combine, process1, process2
from .generators import generate
from .intervals import Instance, Interval, load_instance, parse_instance
from .oracles import opt_unweighted, opt_weighted

__version__ = "0.1.0"

__all__ = [
    "Algorithm1",
    "Instance",
    "Interval",
    "RandOrderError",
    "VerificationFailed",
    "combine",
    "exact_expectation",
    "generate",
    "load_instance",
    "max_expected_charge",
    "monte_carlo",
    "opt_unweighted",
    "opt_weighted",
    "parse_instance",
    "process1",
    "process2",
    "run",
    "simulate_charging",
]
