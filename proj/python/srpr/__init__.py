"""Smoothed robust phase retrieval.

Thin wrapper over the C++ core: instance generation, the MAPG/IPL solver
pipeline, the fast Walsh-Hadamard transform, and population landscape probes.
"""

from ._srpr import (
    Instance,
    fwht,
    gaussian_instance,
    hadamard_instance,
    limiting_u2,
    load_instance,
    relative_error,
    save_instance,
    solve,
    solve_u_delta,
    u0_limit,
)

__all__ = [
    "Instance",
    "fwht",
    "gaussian_instance",
    "hadamard_instance",
    "limiting_u2",
    "load_instance",
    "relative_error",
    "save_instance",
    "solve",
    "solve_u_delta",
    "u0_limit",
]
