"""Discrete L-infinity minimisation of F(x, Laplacian u) by p-continuation.

Fields are numpy arrays of shape (n,) on intervals and (ny, nx) on
rectangles and disks; masked disk nodes hold 0.
"""

import json as _json

from ._core import (  # noqa: F401
    ConfigError,
    Domain,
    LinfError,
    Model,
    SolverError,
    build_w,
    continuation,
    energy,
    laplacian,
    minimize,
    oracle,
    power_mean,
)
from . import _core


def run(command, config, solution="", p=0.0, epsilon=None):
    """Runs a command line subcommand in-process and returns (exit_code, report)."""
    code, text = _core._run(command, str(config), str(solution), float(p), epsilon)
    return code, _json.loads(text)


__all__ = [
    "ConfigError",
    "Domain",
    "LinfError",
    "Model",
    "SolverError",
    "build_w",
    "continuation",
    "energy",
    "laplacian",
    "minimize",
    "oracle",
    "power_mean",
    "run",
]
