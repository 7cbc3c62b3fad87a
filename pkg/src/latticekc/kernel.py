"""Reproducing kernels of weighted Sobolev spaces of dominating mixed smoothness.

The kernel of smoothness ``alpha`` in ``s`` dimensions is

    K(x, y) = sum_u gamma_u prod_{j in u} eta_alpha(x_j, y_j),   gamma_{} = 1,

with the univariate increment

    eta_alpha(x, y) = sum_{tau=1}^{alpha} B_tau(x) B_tau(y) / (tau!)^2
                      + (-1)^(alpha+1) B_{2 alpha}({x - y}) / (2 alpha)!.

Two coordinate-weight structures are supported: product weights
``gamma_u = prod_{j in u} gt_j`` (O(s) per kernel value) and POD weights
``gamma_u = Gamma_|u| prod_{j in u} gt_j`` (O(s^2) per kernel value via a
subset-size recursion).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from latticekc.config import parse_kv as _parse_kv

__all__ = [
    "BERNOULLI_COEFFS",
    "CoordinateWeights",
    "KernelSpec",
    "bernoulli_poly",
    "periodic_bernoulli",
    "eta_alpha",
    "kernel_eval",
    "kernel_matrix",
    "load_kernel_spec",
]

MAX_ALPHA = 4

# Bernoulli polynomials B_0..B_8, coefficients listed from the leading power down.
_F = Fraction
BERNOULLI_COEFFS: tuple[tuple[Fraction, ...], ...] = (
    (_F(1),),
    (_F(1), _F(-1, 2)),
    (_F(1), _F(-1), _F(1, 6)),
    (_F(1), _F(-3, 2), _F(1, 2), _F(0)),
    (_F(1), _F(-2), _F(1), _F(0), _F(-1, 30)),
    (_F(1), _F(-5, 2), _F(5, 3), _F(0), _F(-1, 6), _F(0)),
    (_F(1), _F(-3), _F(5, 2), _F(0), _F(-1, 2), _F(0), _F(1, 42)),
    (_F(1), _F(-7, 2), _F(7, 2), _F(0), _F(-7, 6), _F(0), _F(1, 6), _F(0)),
    (_F(1), _F(-4), _F(14, 3), _F(0), _F(-7, 3), _F(0), _F(2, 3), _F(0), _F(-1, 30)),
)
_COEFFS = tuple(tuple(float(c) for c in row) for row in BERNOULLI_COEFFS)


def _horner(coeffs, x):
    out = np.zeros_like(x) + coeffs[0]
    for c in coeffs[1:]:
        out = out * x + c
    return out


def bernoulli_poly(tau: int, x):
    """Evaluate the Bernoulli polynomial ``B_tau`` at ``x`` (scalar or array)."""
    if not (isinstance(tau, (int, np.integer)) and 0 <= tau <= 2 * MAX_ALPHA):
        raise ValueError(f"Bernoulli degree must be an integer in 0..{2 * MAX_ALPHA}, got {tau!r}")
    x = np.asarray(x, dtype=float)
    out = _horner(_COEFFS[tau], x)
    return out[()] if out.ndim == 0 else out


def periodic_bernoulli(order: int, t):
    """1-periodic extension ``B_order(t - floor(t))`` for even ``order`` in 2..8."""
    if order not in (2, 4, 6, 8):
        raise ValueError(f"periodic Bernoulli order must be one of 2, 4, 6, 8, got {order!r}")
    t = np.asarray(t, dtype=float)
    return bernoulli_poly(order, t - np.floor(t))


def _check_alpha(alpha):
    if not (isinstance(alpha, (int, np.integer)) and 1 <= alpha <= MAX_ALPHA):
        raise ValueError(f"smoothness alpha must be an integer in 1..{MAX_ALPHA}, got {alpha!r}")


def eta_alpha(alpha: int, x, y):
    """Univariate kernel increment, ``K_{1,1}^alpha(x, y) - 1``, for ``x, y`` in [0, 1].

    Broadcasts over array arguments. The periodic term is evaluated at
    ``|x - y|``: the even periodic Bernoulli polynomials are symmetric, so
    this equals ``B_{2a}({x - y})`` and makes the result bitwise symmetric
    in its arguments.
    """
    _check_alpha(alpha)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = _eta(alpha, _scaled_bernoulli(alpha, x), _scaled_bernoulli(alpha, y), np.abs(x - y))
    return out[()] if out.ndim == 0 else out


def _scaled_bernoulli(alpha, x):
    """Stack of ``B_tau(x) / tau!`` for ``tau = 1..alpha`` along a new leading axis."""
    return np.stack([_horner(_COEFFS[t], x) / math.factorial(t) for t in range(1, alpha + 1)])


def _eta(alpha, bx, by, absdiff):
    sign = 1.0 if alpha % 2 == 1 else -1.0
    out = sign * _horner(_COEFFS[2 * alpha], absdiff) / math.factorial(2 * alpha)
    for t in range(alpha):
        out = out + bx[t] * by[t]
    return out


@dataclass(frozen=True, eq=False)
class CoordinateWeights:
    """Product or POD coordinate weights.

    ``gamma_tilde`` holds the per-coordinate factors; for POD weights
    ``Gamma`` holds the order-dependent factors ``Gamma_0..Gamma_s`` with
    ``Gamma_0 = 1`` (the weight of the empty set).
    """

    scheme: str
    gamma_tilde: np.ndarray
    Gamma: np.ndarray | None = None

    def __post_init__(self):
        scheme = self.scheme.lower()
        if scheme not in ("product", "pod"):
            raise ValueError(f"unknown weight scheme {self.scheme!r}")
        object.__setattr__(self, "scheme", scheme)
        gt = np.atleast_1d(np.array(self.gamma_tilde, dtype=float))
        if gt.ndim != 1 or gt.size < 1:
            raise ValueError("gamma_tilde must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(gt)) or np.any(gt <= 0):
            raise ValueError("gamma_tilde entries must be positive and finite")
        gt.setflags(write=False)
        object.__setattr__(self, "gamma_tilde", gt)
        if scheme == "pod":
            if self.Gamma is None:
                raise ValueError("POD weights need the order factors Gamma_0..Gamma_s")
            G = np.atleast_1d(np.array(self.Gamma, dtype=float))
            if G.shape != (gt.size + 1,):
                raise ValueError(f"Gamma must have s+1 = {gt.size + 1} entries, got {G.size}")
            if G[0] != 1.0:
                raise ValueError(f"Gamma_0 must equal 1, got {G[0]}")
            if not np.all(np.isfinite(G)) or np.any(G < 0):
                raise ValueError("Gamma entries must be nonnegative and finite")
            G.setflags(write=False)
            object.__setattr__(self, "Gamma", G)
        elif self.Gamma is not None:
            raise ValueError("product weights take no Gamma sequence")

    def _key(self):
        G = None if self.Gamma is None else self.Gamma.tobytes()
        return (self.scheme, self.gamma_tilde.tobytes(), G)

    def __eq__(self, other):
        if not isinstance(other, CoordinateWeights):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    @property
    def s(self) -> int:
        return self.gamma_tilde.size

    @classmethod
    def product(cls, gamma_tilde) -> "CoordinateWeights":
        return cls("product", gamma_tilde)

    @classmethod
    def pod(cls, Gamma, gamma_tilde) -> "CoordinateWeights":
        return cls("pod", gamma_tilde, Gamma)

    @classmethod
    def unit(cls, s: int) -> "CoordinateWeights":
        return cls("product", np.ones(s))

    def subset_weight(self, u) -> float:
        """``gamma_u`` for a subset ``u`` of 0-based coordinate indices."""
        u = list(u)
        prod = float(np.prod(self.gamma_tilde[u])) if u else 1.0
        if self.scheme == "pod":
            return float(self.Gamma[len(u)]) * prod
        return prod


@dataclass(frozen=True)
class KernelSpec:
    alpha: int
    weights: CoordinateWeights

    def __post_init__(self):
        _check_alpha(self.alpha)
        object.__setattr__(self, "alpha", int(self.alpha))

    @property
    def s(self) -> int:
        return self.weights.s

    @classmethod
    def unweighted(cls, alpha: int, s: int) -> "KernelSpec":
        return cls(alpha, CoordinateWeights.unit(s))

    def with_alpha(self, alpha: int) -> "KernelSpec":
        return KernelSpec(alpha, self.weights)


def _combine(spec: KernelSpec, etas):
    """Fold per-coordinate eta arrays into ``K - 1`` (the non-constant part).

    Returning ``K - 1`` rather than ``K`` keeps worst-case-error formulas
    free of the cancellation against the constant term.
    """
    gt = spec.weights.gamma_tilde
    if spec.weights.scheme == "product":
        # R_j = prod_{i<=j}(1 + g_i eta_i) - 1, updated without forming the product
        rest = np.zeros_like(etas[0])
        for j, eta in enumerate(etas):
            ge = gt[j] * eta
            rest = rest + ge * (1.0 + rest)
        return rest
    Gamma = spec.weights.Gamma
    s = len(etas)
    # P[l] holds the degree-l elementary symmetric sum of g_j eta_j over processed coordinates
    P = [np.ones_like(etas[0])] + [None] * s
    for k, eta in enumerate(etas, start=1):
        ge = gt[k - 1] * eta
        P[k] = ge * P[k - 1]
        for l in range(k - 1, 0, -1):
            P[l] = P[l] + ge * P[l - 1]
    out = Gamma[1] * P[1]
    for l in range(2, s + 1):
        out = out + Gamma[l] * P[l]
    return out


def _check_points(spec, x, name):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :] if spec.s > 1 or x.size == 1 else x[:, None]
    if x.ndim != 2 or x.shape[1] != spec.s:
        raise ValueError(f"{name} has dimension {x.shape[-1]}, kernel has s={spec.s}")
    if np.any((x < 0.0) | (x > 1.0)):
        raise ValueError(f"{name} must lie in [0, 1]^s")
    return x


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Kernel value ``K(x, y)`` for two points of ``[0, 1]^s``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.size != spec.s or y.size != spec.s:
        raise ValueError(f"points have dimensions {x.size} and {y.size}, kernel has s={spec.s}")
    if np.any((x < 0) | (x > 1)) or np.any((y < 0) | (y > 1)):
        raise ValueError("points must lie in [0, 1]^s")
    etas = [eta_alpha(spec.alpha, x[j], y[j]) for j in range(spec.s)]
    return float(1.0 + _combine(spec, [np.asarray(e) for e in etas]))


def kernel_matrix(spec: KernelSpec, X, Y=None, *, centered: bool = False) -> np.ndarray:
    """Matrix ``K(X[i], Y[j])``; with ``centered=True`` returns ``K - 1``.

    ``eta_alpha`` is computed once per coordinate and point pair and the
    result reused by the weight recursion.
    """
    X = _check_points(spec, X, "X")
    Y = X if Y is None else _check_points(spec, Y, "Y")
    a = spec.alpha
    etas = []
    for j in range(spec.s):
        bx = _scaled_bernoulli(a, X[:, j])[:, :, None]
        by = _scaled_bernoulli(a, Y[:, j])[:, None, :]
        etas.append(_eta(a, bx, by, np.abs(X[:, j, None] - Y[None, :, j])))
    rest = _combine(spec, etas)
    return rest if centered else 1.0 + rest


# -- kernel specification files ---------------------------------------------------------

def _floats(value: str) -> list[float]:
    return [float(v) for v in value.replace(",", " ").split()]


def parse_kernel_spec(text: str, source: str = "<string>") -> KernelSpec:
    """Parse the key-value kernel format (see README, "Kernel specification files")."""
    kv = _parse_kv(text, source)
    missing = {"scheme", "alpha", "s", "gamma_tilde"} - kv.keys()
    if missing:
        raise ValueError(f"{source}: missing keys {sorted(missing)}")
    unknown = kv.keys() - {"scheme", "alpha", "s", "gamma_tilde", "Gamma"}
    if unknown:
        raise ValueError(f"{source}: unknown keys {sorted(unknown)}")
    s = int(kv["s"])
    gt = _floats(kv["gamma_tilde"])
    if len(gt) == 1 and s > 1:
        gt = gt * s
    if len(gt) != s:
        raise ValueError(f"{source}: gamma_tilde has {len(gt)} entries, s = {s}")
    scheme = kv["scheme"].lower()
    if scheme == "pod":
        if "Gamma" not in kv:
            raise ValueError(f"{source}: POD scheme needs a Gamma list")
        weights = CoordinateWeights.pod(_floats(kv["Gamma"]), gt)
    else:
        if "Gamma" in kv:
            raise ValueError(f"{source}: Gamma given for scheme {scheme!r}")
        weights = CoordinateWeights(scheme, gt)
    return KernelSpec(int(kv["alpha"]), weights)


def load_kernel_spec(path) -> KernelSpec:
    path = Path(path)
    return parse_kernel_spec(path.read_text(), str(path))


def format_kernel_spec(spec: KernelSpec) -> str:
    w = spec.weights
    lines = [
        f"scheme = {w.scheme}",
        f"alpha = {spec.alpha}",
        f"s = {spec.s}",
        "gamma_tilde = " + " ".join(repr(float(v)) for v in w.gamma_tilde),
    ]
    if w.scheme == "pod":
        lines.append("Gamma = " + " ".join(repr(float(v)) for v in w.Gamma))
    return "\n".join(lines) + "\n"
