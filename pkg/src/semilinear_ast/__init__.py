"""Association schemes on triples from affine special semilinear groups."""

from .action import (
    GroupSpec,
    SemilinearMap,
    TriplePartition,
    bfs_orbit_oracle,
    label_all_triples,
    stabilizer_orbits_on_domain,
    transporter_to_base,
    two_point_stabilizer,
)
from .closedform import crosscheck, predict_relation_counts, predict_third_valencies
from .gf import FieldTower, build_tower
from .scheme import compare_partitions, verify_ast

__all__ = [
    "FieldTower",
    "GroupSpec",
    "SemilinearMap",
    "TriplePartition",
    "bfs_orbit_oracle",
    "build_tower",
    "compare_partitions",
    "crosscheck",
    "label_all_triples",
    "predict_relation_counts",
    "predict_third_valencies",
    "stabilizer_orbits_on_domain",
    "transporter_to_base",
    "two_point_stabilizer",
    "verify_ast",
]
__version__ = "0.1.0"
