"""Finite-n diagnostics for wisdom of crowds under DeGroot averaging."""

__version__ = "0.1.0"

from .diagnostics import (  # noqa: E402
    DiagnosticConfig,
    TrendTrace,
    WisdomAnalyzer,
    WisdomReport,
    classify,
    verdict,
)
from .estimators import InfluenceTransformer, StationaryDistribution  # noqa: E402
from .exceptions import (  # noqa: E402
    ConvergenceError,
    CrowdwiseError,
    ExceedsCapError,
    NotPrimitiveError,
    NotStochasticError,
    TripletFormatError,
    ZeroOutDegreeError,
)
from .families import FAMILIES, FamilyGenerator  # noqa: E402
from .simulation import DeGrootSimulator, SimulationConfig, simulate  # noqa: E402
from .stochastic import (  # noqa: E402
    RowStochasticMatrix,
    WeightGraph,
    build_from_weights,
    influence_profile,
    mixing_time,
    stationary_distribution,
)

__all__ = [
    "ConvergenceError", "CrowdwiseError", "DeGrootSimulator", "DiagnosticConfig",
    "ExceedsCapError", "FAMILIES", "FamilyGenerator", "InfluenceTransformer",
    "NotPrimitiveError", "NotStochasticError", "RowStochasticMatrix", "SimulationConfig",
    "StationaryDistribution", "TrendTrace", "TripletFormatError", "WeightGraph",
    "WisdomAnalyzer", "WisdomReport", "ZeroOutDegreeError", "build_from_weights", "classify",
    "influence_profile", "mixing_time", "simulate", "stationary_distribution", "verdict",
]
