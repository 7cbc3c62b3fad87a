"""Parametric elliptic PDE and its uncertainty-quantification study.

The model problem on the unit square is

    -div(a(x, y) grad u) = f(x),   u = 0 on the boundary,
    a(x, y) = 1/2 + 1/2 sum_{j=1}^s j^-2 y_j sin(j pi x_1) sin(j pi x_2),

with parameters ``y`` in ``[-1/2, 1/2]^s`` and quantity of interest
``G(u) = integral of u``. It is discretized with P1 elements on a
uniform right-angled triangulation, the coefficient sampled at element
centroids.
"""
from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from latticekc.cubature import assemble_gram, equal_rule, solve_optimal_weights, wce_equal, wce_optimal
from latticekc.kernel import CoordinateWeights, KernelSpec
from latticekc.points import GeneratingVector, apply_shift, generate_lattice, sample_shift
from latticekc.rates import default_window, fit_rate

__all__ = [
    "Mesh",
    "UqConfig",
    "UqResult",
    "diffusion_coeff",
    "make_mesh",
    "solve_pde",
    "qoi",
    "qoi_batch",
    "riemann_zeta",
    "pod_weights_uq",
    "uq_kernel_spec",
    "to_parameters",
    "run_uq_experiment",
]

log = logging.getLogger(__name__)


# -- zeta and POD weights ------------------------------------------------------------------

# B_2, B_4, ..., B_16
_BERNOULLI_NUMBERS = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510)


def riemann_zeta(x: float) -> float:
    """Riemann zeta function for real ``x > 1`` by Euler-Maclaurin summation.

    Sums the first ``N - 1 = 15`` terms exactly and corrects the tail
    with the integral, the half term and eight Bernoulli corrections.
    """
    x = float(x)
    if not x > 1.0:
        raise ValueError(f"zeta(x) needs x > 1, got {x}")
    N = 16
    head = math.fsum(k ** -x for k in range(1, N))
    tail = N ** (1.0 - x) / (x - 1.0) + 0.5 * N ** -x
    rising = x  # x (x+1) ... (x + 2j - 2)
    for j, b in enumerate(_BERNOULLI_NUMBERS, start=1):
        tail += b / math.factorial(2 * j) * rising * N ** (-x - 2 * j + 1)
        rising *= (x + 2 * j - 1) * (x + 2 * j)
    return head + tail


def pod_weights_uq(s: int, delta: float = 0.05) -> CoordinateWeights:
    """POD weights matched to the diffusion coefficient's decay.

    ``gamma_u = (|u|! prod_{j in u} b_j / c)^(2 / (1 + lam))`` with
    ``b_j = j^-2 / (1 - zeta(2)/2)``, ``c = sqrt(2 zeta(2 lam) / (2 pi^2)^lam)``
    and ``lam = 1 / (2 - 2 delta)``, returned in factored form.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if s < 1:
        raise ValueError(f"s must be positive, got {s}")
    lam = 1.0 / (2.0 - 2.0 * delta)
    p = 2.0 / (1.0 + lam)
    j = np.arange(1, s + 1, dtype=float)
    b = j**-2 / (1.0 - 0.5 * riemann_zeta(2.0))
    c = math.sqrt(2.0 * riemann_zeta(2.0 * lam) / (2.0 * math.pi**2) ** lam)
    gamma_tilde = (b / c) ** p
    Gamma = np.array([math.exp(p * math.lgamma(l + 1)) for l in range(s + 1)])
    Gamma[0] = 1.0
    return CoordinateWeights.pod(Gamma, gamma_tilde)


def uq_kernel_spec(s: int, delta: float = 0.05) -> KernelSpec:
    return KernelSpec(1, pod_weights_uq(s, delta))


# -- coefficient and mesh ---------------------------------------------------------------------

def diffusion_coeff(x, y) -> np.ndarray:
    """``a(x, y)`` at spatial points ``x`` (shape ``(..., 2)``) for parameter ``y``."""
    x = np.asarray(x, dtype=float)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.ndim != 1:
        raise ValueError("y must be a single parameter vector")
    if np.any(np.abs(y) > 0.5):
        raise ValueError("parameters must lie in [-1/2, 1/2]^s; map cube nodes with to_parameters")
    if x.shape[-1] != 2:
        raise ValueError("spatial points need two coordinates")
    return 0.5 + _coeff_modes(x, y.size) @ y


def _coeff_modes(x, s):
    """Columns ``1/2 j^-2 sin(j pi x_1) sin(j pi x_2)`` for ``j = 1..s``."""
    j = np.arange(1, s + 1, dtype=float)
    return 0.5 * j**-2 * np.sin(np.pi * x[..., 0:1] * j) * np.sin(np.pi * x[..., 1:2] * j)


def to_parameters(nodes) -> np.ndarray:
    """Map cubature nodes in ``[0, 1]^s`` to parameters ``y = t - 1/2``."""
    nodes = np.asarray(nodes, dtype=float)
    if np.any((nodes < 0) | (nodes > 1)):
        raise ValueError("cubature nodes must lie in [0, 1]^s")
    return nodes - 0.5


@dataclass(frozen=True, eq=False)
class Mesh:
    """Uniform triangulation of the unit square with ``2**level`` cells per side."""

    level: int
    coords: np.ndarray = field(repr=False)
    elements: np.ndarray = field(repr=False)
    boundary: np.ndarray = field(repr=False)
    area: float
    local_stiffness: np.ndarray = field(repr=False)

    @property
    def h(self) -> float:
        return 2.0**-self.level

    @property
    def n_nodes(self) -> int:
        return self.coords.shape[0]

    @property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary)

    @property
    def centroids(self) -> np.ndarray:
        return self.coords[self.elements].mean(axis=1)


def make_mesh(level: int) -> Mesh:
    if level < 1:
        raise ValueError(f"mesh level must be at least 1, got {level}")
    m = 2**level
    h = 1.0 / m
    idx = np.arange(m + 1)
    X1, X2 = np.meshgrid(idx * h, idx * h, indexing="xy")
    coords = np.column_stack([X1.ravel(), X2.ravel()])
    node = lambda i, j: j * (m + 1) + i  # noqa: E731
    I, J = np.meshgrid(np.arange(m), np.arange(m), indexing="xy")
    I, J = I.ravel(), J.ravel()
    p00, p10, p11, p01 = node(I, J), node(I + 1, J), node(I + 1, J + 1), node(I, J + 1)
    elements = np.concatenate([np.column_stack([p00, p10, p11]), np.column_stack([p00, p11, p01])])
    on_edge = (idx == 0) | (idx == m)
    boundary = (on_edge[None, :] | on_edge[:, None]).ravel()
    # constant-gradient P1 stiffness, area * G G^T, per element
    v = coords[elements]
    e1 = v[:, 1] - v[:, 0]
    e2 = v[:, 2] - v[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    inv = np.empty((len(elements), 2, 2))
    inv[:, 0, 0] = e2[:, 1] / det
    inv[:, 0, 1] = -e2[:, 0] / det
    inv[:, 1, 0] = -e1[:, 1] / det
    inv[:, 1, 1] = e1[:, 0] / det
    ref_grad = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    grads = ref_grad[None] @ inv  # (E, 3, 2)
    area = 0.5 * h * h
    local = area * grads @ grads.transpose(0, 2, 1)
    return Mesh(level, coords, elements, boundary, area, local)


class _Assembler:
    """Maps element coefficients straight into the CSR data of the interior stiffness."""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        inner = mesh.interior
        renum = -np.ones(mesh.n_nodes, dtype=np.int64)
        renum[inner] = np.arange(inner.size)
        el = renum[mesh.elements]
        rows = np.repeat(el, 3, axis=1).ravel()
        cols = np.tile(el, (1, 3)).ravel()
        keep = (rows >= 0) & (cols >= 0)
        self.keep = np.flatnonzero(keep)
        rows, cols = rows[keep], cols[keep]
        pattern = scipy.sparse.csr_matrix(
            (np.ones(rows.size), (rows, cols)), shape=(inner.size, inner.size)
        )
        pattern.sum_duplicates()
        pattern.sort_indices()
        self.indptr, self.indices = pattern.indptr, pattern.indices
        # position of each element entry inside the CSR data array
        csr_keys = np.repeat(np.arange(inner.size), np.diff(self.indptr)) * inner.size + self.indices
        target = np.searchsorted(csr_keys, rows * inner.size + cols)
        self.gather = scipy.sparse.csr_matrix(
            (np.ones(rows.size), (target, np.arange(rows.size))), shape=(self.indices.size, rows.size)
        )
        self.local = mesh.local_stiffness.reshape(len(mesh.elements), 9)
        self.centroids = mesh.centroids
        self.size = inner.size

    def stiffness(self, a_elem) -> scipy.sparse.csr_matrix:
        vals = (a_elem[:, None] * self.local).ravel()[self.keep]
        data = self.gather @ vals
        return scipy.sparse.csr_matrix((data, self.indices, self.indptr), shape=(self.size, self.size))

    def load(self, f) -> np.ndarray:
        fc = np.asarray(f(self.centroids), dtype=float) * np.ones(len(self.centroids))
        F = np.zeros(self.mesh.n_nodes)
        np.add.at(F, self.mesh.elements, (fc * self.mesh.area / 3.0)[:, None])
        return F[self.mesh.interior]


_ASSEMBLERS: dict[int, _Assembler] = {}


def _assembler(mesh: Mesh) -> _Assembler:
    a = _ASSEMBLERS.get(id(mesh))
    if a is None or a.mesh is not mesh:
        a = _Assembler(mesh)
        _ASSEMBLERS[id(mesh)] = a
    return a


def source_x1(x):
    return x[..., 0]


def _solve(A, F, solver):
    if solver == "direct":
        u = scipy.sparse.linalg.spsolve(A.tocsc(), F)
    elif solver == "cg":
        u, info = scipy.sparse.linalg.cg(A, F, rtol=1e-12, atol=0.0, maxiter=10 * F.size)
        if info != 0:
            raise RuntimeError(f"conjugate gradients did not converge (info={info})")
    else:
        raise ValueError(f"unknown FEM solver {solver!r}")
    if not np.all(np.isfinite(u)):
        raise np.linalg.LinAlgError("singular stiffness matrix; is the coefficient elliptic?")
    return u


def solve_pde(y, mesh: Mesh, f=source_x1, *, solver: str = "direct", coeff=None) -> np.ndarray:
    """Nodal values of the P1 Galerkin solution (zero on boundary nodes).

    ``coeff``, if given, replaces the parametric coefficient by a callable
    of the spatial points (used for constant-coefficient checks).
    """
    asm = _assembler(mesh)
    if coeff is None:
        a_elem = diffusion_coeff(asm.centroids, y)
    else:
        a_elem = np.asarray(coeff(asm.centroids), dtype=float) * np.ones(len(asm.centroids))
    if np.any(a_elem <= 0):
        raise ValueError("diffusion coefficient is not positive at every centroid")
    u = np.zeros(mesh.n_nodes)
    u[mesh.interior] = _solve(asm.stiffness(a_elem), asm.load(f), solver)
    return u


def qoi(u, mesh: Mesh) -> float:
    """Exact integral of the piecewise-linear interpolant of ``u``."""
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.size != mesh.n_nodes:
        raise ValueError(f"{u.size} nodal values for a mesh with {mesh.n_nodes} nodes")
    return float(mesh.area * u[mesh.elements].sum(axis=1).sum() / 3.0)


def qoi_batch(params, mesh: Mesh, f=source_x1, *, solver: str = "direct") -> np.ndarray:
    """``G(u(., y))`` for every row ``y`` of ``params``."""
    asm = _assembler(mesh)
    F = asm.load(f)
    modes = _coeff_modes(asm.centroids, params.shape[1])
    g = np.zeros(mesh.n_nodes)
    np.add.at(g, mesh.elements, mesh.area / 3.0)
    g = g[mesh.interior]
    out = np.empty(params.shape[0])
    for i, y in enumerate(params):
        if np.any(np.abs(y) > 0.5):
            raise ValueError("parameters must lie in [-1/2, 1/2]^s")
        out[i] = g @ _solve(asm.stiffness(0.5 + modes @ y), F, solver)
    return out


# -- the UQ study -----------------------------------------------------------------------------

@dataclass(frozen=True)
class UqConfig:
    s: int
    level: int = 4
    ns: tuple[int, ...] = tuple(2**k for k in range(1, 10))
    R: int = 8
    seed: int = 0
    delta: float = 0.05
    n_ref: int = 2**12
    methods: tuple[str, ...] = ("qmc", "kernel")
    solver: str = "direct"
    shifted: bool = True

    def __post_init__(self):
        if not self.shifted and self.R != 1:
            raise ValueError("an unshifted study has exactly one replicate, set R = 1")
        if self.s < 1 or self.R < 1 or self.level < 1:
            raise ValueError("s, R and level must be positive")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        for n in (*self.ns, self.n_ref):
            if n < 1 or n & (n - 1):
                raise ValueError(f"rule sizes must be powers of two, got {n}")
        bad = set(self.methods) - {"qmc", "kernel"}
        if bad or not self.methods:
            raise ValueError(f"methods must be drawn from qmc, kernel; got {self.methods}")
        object.__setattr__(self, "ns", tuple(int(n) for n in self.ns))
        object.__setattr__(self, "methods", tuple(self.methods))

    def digest(self) -> str:
        text = repr((self.s, self.level, self.ns, self.R, self.seed, self.delta,
                     self.n_ref, self.methods, self.solver, self.shifted))
        return hashlib.sha256(text.encode()).hexdigest()[:12]


@dataclass
class UqResult:
    config: UqConfig
    gv_digest: str
    rows: list[dict]
    slopes: dict[str, float]
    reference: dict[str, float]


def _reduce(gv: GeneratingVector, n: int) -> GeneratingVector:
    if gv.n % n:
        raise ValueError(f"generating vector for n={gv.n} cannot be reduced to n={n}")
    return GeneratingVector(n, tuple(z % n for z in gv.z)) if n > 1 else GeneratingVector(1, gv.z)


def _estimates(ps, values, spec, methods):
    """Equal-weight and kernel estimates plus their worst-case errors."""
    out = {}
    gram = assemble_gram(spec, ps)
    if "qmc" in methods:
        rule = equal_rule(ps)
        out["qmc"] = (float(rule.weights @ values), wce_equal(spec, ps, gram=gram))
    if "kernel" in methods:
        rule = solve_optimal_weights(gram)
        out["kernel"] = (float(rule.weights @ values), wce_optimal(rule))
    return out


def _uq_level(cfg: UqConfig, gv: GeneratingVector, n: int, ref: dict, f=source_x1):
    mesh = make_mesh(cfg.level)
    spec = uq_kernel_spec(cfg.s, cfg.delta)
    base = generate_lattice(_reduce(gv, n))
    sq = {m: [] for m in cfg.methods}
    wce = {m: [] for m in cfg.methods}
    for r in range(cfg.R):
        ps = apply_shift(base, sample_shift(cfg.seed + r, cfg.s)) if cfg.shifted else base
        values = qoi_batch(to_parameters(ps.nodes), mesh, f, solver=cfg.solver)
        for m, (est, e) in _estimates(ps, values, spec, cfg.methods).items():
            sq[m].append((est - ref[m]) ** 2)
            wce[m].append(e)
    return [
        {
            "method": m,
            "n": n,
            "rms_error": math.sqrt(math.fsum(sq[m]) / cfg.R),
            "wce": math.fsum(wce[m]) / cfg.R,
        }
        for m in cfg.methods
    ]


def run_uq_experiment(cfg: UqConfig, gv: GeneratingVector, *, f=source_x1, jobs: int = 1) -> UqResult:
    """Shift-averaged errors of equal-weight and kernel cubature for ``E[G(u)]``.

    For every ``n`` and each of ``R`` shifts (shift ``r`` drawn with seed
    ``cfg.seed + r``) both estimates use the same shifted lattice; kernel
    weights are recomputed per point set. Errors are measured against an
    unshifted ``n_ref``-point rule of the same method and reported as the
    root mean square over shifts; the worst-case error column is the mean
    over shifts. With ``shifted=False`` the single replicate uses the
    plain lattice. ``jobs > 1`` spreads the sizes ``n`` over worker
    processes; the result does not depend on it.
    """
    if gv.s < cfg.s:
        raise ValueError(f"generating vector has {gv.s} components, need {cfg.s}")
    gv = GeneratingVector(gv.n, gv.z[: cfg.s])
    mesh = make_mesh(cfg.level)
    spec = uq_kernel_spec(cfg.s, cfg.delta)

    ref_ps = generate_lattice(_reduce(gv, cfg.n_ref))
    ref_values = qoi_batch(to_parameters(ref_ps.nodes), mesh, f, solver=cfg.solver)
    ref = {m: v for m, (v, _) in _estimates(ref_ps, ref_values, spec, cfg.methods).items()}
    log.info("reference values %s", ref)

    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_uq_level, cfg, gv, n, ref, f) for n in cfg.ns]
            levels = [fut.result() for fut in futures]
    else:
        levels = [_uq_level(cfg, gv, n, ref, f) for n in cfg.ns]
    rows = [row for level in levels for row in level]

    slopes = {}
    for m in cfg.methods:
        ns = np.array([r["n"] for r in rows if r["method"] == m])
        errs = np.array([r["rms_error"] for r in rows if r["method"] == m])
        wces = np.array([r["wce"] for r in rows if r["method"] == m])
        window = default_window(ns) if ns.size >= 5 else np.ones(ns.size, bool)
        if np.sum(window) >= 3:
            slopes[f"{m}_error"] = fit_rate(ns[window], errs[window])
            slopes[f"{m}_wce"] = fit_rate(ns[window], wces[window])
    return UqResult(cfg, gv.digest(), rows, slopes, ref)
