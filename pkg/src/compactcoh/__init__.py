"""Multiplicities of G x G-modules in line-bundle cohomology of regular compactifications."""

from .cohomology import PairDims, SimplicialComplex, chamber_rel_dims, order_complex, pair_dims_V_W, relative_dims
from .engine import (
    DecompositionTable,
    MultiplicityReport,
    Term,
    check_wonderful_oracle,
    decomposition_table,
    m0_characterization,
    multiplicities,
    multiplicity,
    search_wonderful,
    toric_multiplicity,
    wonderful_multiplicities,
    wonderful_multiplicity,
    wonderful_support,
)
from .fan import (
    ChamberFan,
    FanError,
    PLFunction,
    PLFunctionError,
    build_chamber_fan,
    build_complete_fan,
    build_pl_function,
    eval_h,
    in_h_plus_X,
    wonderful_fan,
)
from .linalg import RatMatrix, det, lattice_basis, rank, solve_integral, solve_rational
from .refine import Cell, LabeledComplex, graph_refinement
from .rootsys import RootDatum, WeylElement, build_root_datum, weight

__version__ = "0.1.0"
