"""Integer programming models for hop-constrained tree problems.

Two formulations over the same arc variables are provided: a partial
ordering model (threshold variables ``l``/``g``) and an assignment model
(one-hot depth variables ``y``). The package ships its own LP/MIP solver,
an exact Fourier-Motzkin projector used to compare the models' relaxations,
and a small benchmarking front end.
"""

from .formulations import (
    build_aht,
    build_model,
    build_pht,
    decode_tree,
    separate_walk_cuts,
)
from .instances import (
    Instance,
    Walk,
    generate_euclidean,
    generate_random,
    parse_instance,
    read_instance,
    write_instance,
)
from .milp import Model, relax
from .polyhedra import certify_inclusion
from .simplex import solve_lp, solve_mip

__version__ = "0.1.0"

__all__ = [
    "Instance",
    "Model",
    "Walk",
    "build_aht",
    "build_model",
    "build_pht",
    "certify_inclusion",
    "decode_tree",
    "generate_euclidean",
    "generate_random",
    "parse_instance",
    "read_instance",
    "relax",
    "separate_walk_cuts",
    "solve_lp",
    "solve_mip",
    "write_instance",
]
