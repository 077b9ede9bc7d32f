"""Stationary randomized sampling policies for remote estimation of a
two-state source over a Gilbert-Elliott channel, under age-of-information
and cost constraints."""

from .model import (
    ChannelModel,
    Constraints,
    CostVector,
    SourceChain,
    SrpPolicy,
    SystemConfig,
)
from .optimizer import OptimizationResult, Status, solve, solve_grid, sweep
from .simulator import SimResult, simulate, simulate_batch
from .srp import SrpMetrics, evaluate

__version__ = "0.1.0"

__all__ = [
    "ChannelModel",
    "Constraints",
    "CostVector",
    "OptimizationResult",
    "SimResult",
    "SourceChain",
    "SrpMetrics",
    "SrpPolicy",
    "Status",
    "SystemConfig",
    "evaluate",
    "simulate",
    "simulate_batch",
    "solve",
    "solve_grid",
    "sweep",
]
