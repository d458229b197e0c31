"""FHP lattice-gas cellular automaton with four bit-identical execution backends."""

from fhp.collision import CollisionTable, RuleVariant, build_table, collide_node, load_table, save_table, validate_table
from fhp.config import Backend, SimConfig
from fhp.engine import full_step, run
from fhp.kernels import IMPLEMENTATION as KERNELS
from fhp.lattice import Lattice, init_lattice, neighbor_of, opposite, state_digest, sync_ghost_columns

__all__ = [
    "Backend",
    "CollisionTable",
    "KERNELS",
    "Lattice",
    "RuleVariant",
    "SimConfig",
    "build_table",
    "collide_node",
    "full_step",
    "init_lattice",
    "load_table",
    "neighbor_of",
    "opposite",
    "run",
    "save_table",
    "state_digest",
    "sync_ghost_columns",
    "validate_table",
]
