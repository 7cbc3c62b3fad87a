"""Gram assembly, optimal cubature weights and worst-case errors.

For the kernels in :mod:`latticekc.kernel` the mean embedding of the
uniform measure is the constant function 1, which makes every quantity
here a finite computation on the Gram matrix:

* optimal weights solve ``K w = 1``;
* ``e(w)^2 = 1 - 2 sum(w) + w^T K w`` for arbitrary weights;
* ``e(1/n)^2 = -1 + mean(K)`` and ``e(w*)^2 = 1 - sum(w*)``.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from latticekc.kernel import KernelSpec, kernel_matrix
from latticekc.points import PointSet, check_distinct

__all__ = [
    "GramMatrix",
    "CubatureRule",
    "SolverError",
    "WceDefectError",
    "assemble_gram",
    "solve_optimal_weights",
    "equal_rule",
    "apply_rule",
    "interpolant",
    "wce_equal",
    "wce_optimal",
    "wce_general",
    "write_array",
    "read_array",
    "write_weights_text",
]

RADICAND_FLOOR = -1e-12
RESIDUAL_TOL = 1e-8
_BLOCK_ELEMENTS = 1 << 21
_BLOCK_ROWS = 64


class SolverError(RuntimeError):
    """The Gram system could not be solved to the requested accuracy."""


class WceDefectError(ArithmeticError):
    """A squared worst-case error came out clearly negative."""


@dataclass(frozen=True)
class GramMatrix:
    """Gram matrix ``K[k, l] = K(t_k, t_l)``.

    ``centered`` holds ``K - 1`` computed directly from the kernel's
    non-constant part; ``matrix`` is ``1 + centered``.
    """

    centered: np.ndarray
    spec: KernelSpec
    points: PointSet = field(repr=False)

    @property
    def matrix(self) -> np.ndarray:
        return 1.0 + self.centered

    @property
    def n(self) -> int:
        return self.centered.shape[0]


@dataclass(frozen=True)
class CubatureRule:
    points: PointSet
    weights: np.ndarray
    mode: str
    spec: KernelSpec | None = None
    residual: float = 0.0

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.size != self.points.n:
            raise ValueError(f"{w.size} weights for {self.points.n} points")
        if self.mode not in ("equal", "optimal"):
            raise ValueError(f"unknown rule mode {self.mode!r}")
        if self.mode == "optimal" and self.spec is None:
            raise ValueError("optimal rules carry the kernel spec they were derived from")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.points.n


def assemble_gram(spec: KernelSpec, ps: PointSet, *, check: bool = True) -> GramMatrix:
    """Assemble the Gram matrix of ``spec`` over the nodes of ``ps``.

    Only the upper triangle is evaluated, in row blocks, and mirrored.
    Raises :class:`~latticekc.points.DuplicatePointsError` when two nodes
    coincide, since the matrix is then singular.
    """
    if ps.s != spec.s:
        raise ValueError(f"point set has s={ps.s}, kernel has s={spec.s}")
    if check:
        check_distinct(ps)
    x = ps.nodes
    n = ps.n
    out = np.empty((n, n))
    # small row blocks keep the computed region close to the upper triangle
    rows = max(1, min(_BLOCK_ROWS, _BLOCK_ELEMENTS // (n * (spec.s + 2))))
    for i0 in range(0, n, rows):
        i1 = min(n, i0 + rows)
        block = kernel_matrix(spec, x[i0:i1], x[i0:], centered=True)
        out[i0:i1, i0:] = block
        out[i0:, i0:i1] = block.T
    return GramMatrix(out, spec, ps)


def solve_optimal_weights(g: GramMatrix, *, residual_tol: float = RESIDUAL_TOL) -> CubatureRule:
    """Solve ``K w = 1`` by Cholesky factorization.

    No regularization is applied: a Gram matrix that is not numerically
    positive definite (coincident or nearly coincident nodes) raises
    :class:`SolverError`.
    """
    K = g.matrix
    ones = np.ones(g.n)
    try:
        factor = scipy.linalg.cho_factor(K, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"Gram matrix of size {g.n} is not positive definite: {exc}") from exc
    w = scipy.linalg.cho_solve(factor, ones)
    residual = float(np.max(np.abs(K @ w - ones)))
    if not np.isfinite(residual) or residual > residual_tol:
        raise SolverError(f"Gram solve residual {residual:.3e} exceeds {residual_tol:.1e}")
    return CubatureRule(g.points, w, "optimal", g.spec, residual)


def equal_rule(ps: PointSet) -> CubatureRule:
    return CubatureRule(ps, np.full(ps.n, 1.0 / ps.n), "equal")


def apply_rule(rule: CubatureRule, values) -> float:
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.size != rule.n:
        raise ValueError(f"{values.size} function values for a {rule.n}-point rule")
    return float(rule.weights @ values)


def interpolant(rule: CubatureRule, x, spec: KernelSpec | None = None) -> np.ndarray:
    """Evaluate ``sum_k w_k K(x, t_k)`` at the rows of ``x``."""
    spec = spec or rule.spec
    if spec is None:
        raise ValueError("equal-weight rules need an explicit kernel spec")
    return kernel_matrix(spec, x, rule.points.nodes) @ rule.weights


def _root(radicand: float) -> float:
    if radicand < RADICAND_FLOOR:
        raise WceDefectError(f"squared worst-case error {radicand:.3e} is negative")
    return float(np.sqrt(max(radicand, 0.0)))


def wce_equal(spec: KernelSpec, ps: PointSet, *, gram: GramMatrix | None = None) -> float:
    """Worst-case error of the equal-weight rule, ``sqrt(-1 + mean(K))``."""
    g = gram if gram is not None else assemble_gram(spec, ps)
    _check_gram(g, spec, ps)
    return _root(float(np.mean(g.centered)))


def wce_optimal(rule: CubatureRule) -> float:
    """Worst-case error of an optimal rule, ``sqrt(1 - sum(w*))``."""
    if rule.mode != "optimal":
        raise ValueError("wce_optimal needs a rule with optimal weights")
    return _root(1.0 - float(np.sum(rule.weights)))


def wce_general(spec_eval: KernelSpec, ps: PointSet, weights, *, gram: GramMatrix | None = None) -> float:
    """Worst-case error of arbitrary weights in the space of ``spec_eval``.

    Evaluated as ``(1 - sum w)^2 + w^T (K - 1) w``, which equals
    ``1 - 2 sum w + w^T K w`` but adds two nonnegative terms instead of
    cancelling O(1) quantities.
    """
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.size != ps.n:
        raise ValueError(f"{w.size} weights for {ps.n} points")
    g = gram if gram is not None else assemble_gram(spec_eval, ps)
    _check_gram(g, spec_eval, ps)
    radicand = (1.0 - np.sum(w)) ** 2 + float(w @ (g.centered @ w))
    return _root(float(radicand))


def _check_gram(g, spec, ps):
    if g.spec != spec or g.n != ps.n:
        raise ValueError("supplied Gram matrix does not match the kernel spec / point set")


# -- dumps --------------------------------------------------------------------------------
#
# Binary layout, little-endian throughout:
#   bytes 0-7    magic b"LKCARR01"
#   bytes 8-11   uint32 ndim (1 or 2)
#   bytes 12-15  uint32 dtype code (1 = float64)
#   then ndim x uint64 shape, then the float64 data in C order.

MAGIC = b"LKCARR01"


def write_array(path, array) -> None:
    a = np.ascontiguousarray(array, dtype="<f8")
    if a.ndim not in (1, 2):
        raise ValueError("only 1-d and 2-d arrays can be dumped")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", a.ndim, 1))
        fh.write(struct.pack(f"<{a.ndim}Q", *a.shape))
        fh.write(a.tobytes(order="C"))


def read_array(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise ValueError(f"{path}: bad magic header")
    ndim, code = struct.unpack_from("<II", data, 8)
    if ndim not in (1, 2) or code != 1:
        raise ValueError(f"{path}: unsupported layout ndim={ndim} dtype={code}")
    shape = struct.unpack_from(f"<{ndim}Q", data, 16)
    offset = 16 + 8 * ndim
    count = int(np.prod(shape))
    if len(data) != offset + 8 * count:
        raise ValueError(f"{path}: truncated or oversized payload")
    return np.frombuffer(data, dtype="<f8", count=count, offset=offset).reshape(shape).copy()


def write_weights_text(path, weights) -> None:
    with open(path, "w") as fh:
        for w in np.asarray(weights, dtype=float).reshape(-1):
            fh.write(f"{w:.17g}\n")
