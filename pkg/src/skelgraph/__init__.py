"""skelgraph: graph lineages, skeletal graph products, and a semicoarsened
multigrid solver built on deterministic sparse triplet algebra."""

from .graphs import (
    EigPair,
    Graph,
    box_product,
    complete_graph,
    cross_product,
    cycle_graph,
    disjoint_union,
    jacobi_eigensystem,
    laplacian,
    path_graph,
    strong_product,
)
from .lineage import (
    GradedGraph,
    assemble_flat,
    complete_lineage,
    grid2d_lineage,
    growth_profile,
    path_lineage,
    read_lineage,
    unit_lineage,
    validate,
    write_lineage,
)
from .multigrid import (
    CycleSpec,
    DirichletProblem,
    WorkTrace,
    build_problem,
    gauss_seidel,
    run_benchmark,
)
from .skeletal import (
    product_via_flat_assembly,
    skeletal_box,
    skeletal_cross,
    skeletal_cross_nway,
    skeletal_dilated,
    skeletal_strong,
    thicken,
)
from .sparse import Permutation, SparseMatrix, block_assemble, kron, kron_sum, permute

__all__ = [
    "EigPair",
    "Graph",
    "GradedGraph",
    "SparseMatrix",
    "Permutation",
    "CycleSpec",
    "DirichletProblem",
    "WorkTrace",
    "assemble_flat",
    "block_assemble",
    "box_product",
    "build_problem",
    "complete_graph",
    "complete_lineage",
    "cross_product",
    "cycle_graph",
    "disjoint_union",
    "gauss_seidel",
    "grid2d_lineage",
    "growth_profile",
    "jacobi_eigensystem",
    "kron",
    "kron_sum",
    "laplacian",
    "path_graph",
    "path_lineage",
    "permute",
    "product_via_flat_assembly",
    "read_lineage",
    "run_benchmark",
    "skeletal_box",
    "skeletal_cross",
    "skeletal_cross_nway",
    "skeletal_dilated",
    "skeletal_strong",
    "strong_product",
    "thicken",
    "unit_lineage",
    "validate",
    "write_lineage",
]
