"""Optimal control of the constrained quasilinear Allen-Cahn system in 1D.

Thin Python layer over the compiled core: configs, state solves, adjoint
gradients, the optimizer and the acceptance checks.
"""

import json

from ._core import (
    AssumptionError,
    Config,
    ConfigError,
    SolverError,
    check_count,
    check_name,
    gradcheck,
    gradient,
    nodes,
    optimize,
    solve_state,
)
from ._core import run_check as _run_check

__all__ = [
    "AssumptionError",
    "Config",
    "ConfigError",
    "SolverError",
    "check_count",
    "check_name",
    "gradcheck",
    "gradient",
    "nodes",
    "optimize",
    "run_check",
    "solve_state",
]


def run_check(config, criterion):
    """Run acceptance check `criterion` (1-based) and return its result as a dict."""
    return json.loads(_run_check(config, criterion))
