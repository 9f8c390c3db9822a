"""Message passing on simplicial complexes: SWL colour refinement, simplicial
network layers, linear-region counting and an edge-flow benchmark."""
from .complex import (ComplexError, SimplexId, SimplicialComplex, adjacency, boundary_matrix,
                      build_complex, complex_from_simplices, hodge_laplacian)
from .lifting import Graph, clique_lift, enumerate_cliques
from .swl import Verdict, stable_partition, swl_refine, wl_refine

__version__ = "0.1.0"

__all__ = [
    "ComplexError", "SimplexId", "SimplicialComplex", "adjacency", "boundary_matrix", "build_complex",
    "complex_from_simplices", "hodge_laplacian", "Graph", "clique_lift", "enumerate_cliques",
    "Verdict", "stable_partition", "swl_refine", "wl_refine",
]
