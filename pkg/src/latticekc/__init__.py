"""Kernel cubature on rank-1 lattice point sets.

Optimal (kernel) cubature weights for lattice rules in weighted Sobolev
spaces of dominating mixed smoothness, worst-case error evaluation, and
the experiment harness built on top of them.
"""

from latticekc.points import (
    GeneratingVector,
    PointSet,
    Shift,
    apply_shift,
    find_duplicate_rows,
    generate_lattice,
    load_generating_vector,
    sample_shift,
    tent_transform,
)
from latticekc.kernel import (
    CoordinateWeights,
    KernelSpec,
    bernoulli_poly,
    eta_alpha,
    kernel_eval,
    periodic_bernoulli,
)
from latticekc.cubature import (
    CubatureRule,
    GramMatrix,
    apply_rule,
    assemble_gram,
    equal_rule,
    solve_optimal_weights,
    wce_equal,
    wce_general,
    wce_optimal,
)
from latticekc.rates import fit_rate

__version__ = "0.1.0"

__all__ = [
    "CoordinateWeights",
    "CubatureRule",
    "GeneratingVector",
    "GramMatrix",
    "KernelSpec",
    "PointSet",
    "Shift",
    "apply_rule",
    "apply_shift",
    "assemble_gram",
    "bernoulli_poly",
    "equal_rule",
    "eta_alpha",
    "find_duplicate_rows",
    "fit_rate",
    "generate_lattice",
    "kernel_eval",
    "load_generating_vector",
    "periodic_bernoulli",
    "sample_shift",
    "solve_optimal_weights",
    "tent_transform",
    "wce_equal",
    "wce_general",
    "wce_optimal",
]
