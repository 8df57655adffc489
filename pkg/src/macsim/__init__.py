"""macsim: round-synchronous simulation of broadcasting on adversarial
multiple-access channels."""

from .adversary import (
    AdversaryType,
    Bucket,
    RandomizedAdversary,
    RandomizedIndividualAdversary,
    bucket_step,
    check_admissible,
    check_admissible_individual,
)
from .algorithms import ALGORITHM_NAMES, station_class
from .bounds import THEOREM_NAMES, bound_formula, verify_bounds
from .channel import ChannelConfig, Feedback, Message, Packet, compute_feedback, project_feedback
from .dispatch import AdversarySpec, kernel_available, run_execution
from .engine import Engine, ExecutionReport, FixedHorizon, StageVerdict
from .errors import (
    ActivationBoundViolated,
    ConfigError,
    IncompatibleAlgorithm,
    MacsimError,
    OutOfRange,
    TraceExhausted,
)
from .metrics import StageLedger, detect_stabilization

__version__ = "0.1.0"

__all__ = [
    "ActivationBoundViolated",
    "AdversarySpec",
    "AdversaryType",
    "ALGORITHM_NAMES",
    "Bucket",
    "ChannelConfig",
    "ConfigError",
    "Engine",
    "ExecutionReport",
    "Feedback",
    "FixedHorizon",
    "IncompatibleAlgorithm",
    "MacsimError",
    "Message",
    "OutOfRange",
    "Packet",
    "StageLedger",
    "StageVerdict",
    "THEOREM_NAMES",
    "TraceExhausted",
    "bound_formula",
    "bucket_step",
    "check_admissible",
    "check_admissible_individual",
    "compute_feedback",
    "detect_stabilization",
    "kernel_available",
    "project_feedback",
    "run_execution",
    "station_class",
    "verify_bounds",
    "__version__",
]
