"""Structure learners operating on distance matrices."""

from .base import DistanceBook, LearnedTree, RgConfig, default_thresholds, to_newick
from .clrg import clrg_learn, mst, mst_edges
from .nj import nj_learn, snj_learn
from .rg import phi, rg_learn

LEARNERS = {"rg": rg_learn, "nj": nj_learn, "snj": snj_learn, "clrg": clrg_learn}

__all__ = [
    "DistanceBook", "LEARNERS", "LearnedTree", "RgConfig", "clrg_learn", "default_thresholds",
    "mst", "mst_edges", "nj_learn", "phi", "rg_learn", "snj_learn", "to_newick",
]
