"""Rank-1 lattice point sets, random shifts and the tent transform.

Random shifts are drawn with numpy's ``PCG64`` bit generator, seeded
directly with the caller's integer seed, so a given ``(seed, s)`` pair
produces the same shift on every platform numpy supports.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "GeneratingVector",
    "PointSet",
    "Shift",
    "DuplicatePointsError",
    "generate_lattice",
    "sample_shift",
    "apply_shift",
    "tent_transform",
    "find_duplicate_rows",
    "load_generating_vector",
    "frac",
]

PLAIN = "plain-lattice"
SHIFTED = "shifted"
SHIFTED_TENT = "shifted-tent"
_PROVENANCES = (PLAIN, SHIFTED, SHIFTED_TENT)


class DuplicatePointsError(ValueError):
    """Two or more rows of a point set are bitwise identical."""

    def __init__(self, pairs):
        self.pairs = list(pairs)
        shown = ", ".join(f"({i}, {j})" for i, j in self.pairs[:5])
        more = "" if len(self.pairs) <= 5 else f" and {len(self.pairs) - 5} more"
        super().__init__(f"duplicate points at indices {shown}{more}")


def frac(x):
    """Componentwise fractional part ``x - floor(x)``, valid for negative input."""
    x = np.asarray(x, dtype=float)
    return x - np.floor(x)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GeneratingVector:
    """Integer generating vector ``z`` of an ``n``-point lattice in ``s`` dimensions."""

    n: int
    z: tuple[int, ...]

    def __post_init__(self):
        z = tuple(int(v) for v in np.atleast_1d(self.z))
        object.__setattr__(self, "z", z)
        if int(self.n) < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if len(z) < 1:
            raise ValueError("generating vector must have at least one component")
        if self.n > 1:
            bad = [j for j, v in enumerate(z) if not 1 <= v <= self.n - 1]
            if bad:
                raise ValueError(
                    f"components {bad} of z lie outside {{1, ..., {self.n - 1}}}: "
                    f"{[z[j] for j in bad]}"
                )

    @property
    def s(self) -> int:
        return len(self.z)

    def digest(self) -> str:
        """Short content hash, used to tag experiment output rows."""
        text = f"{self.n}:" + ",".join(map(str, self.z))
        return hashlib.sha256(text.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class Shift:
    delta: np.ndarray

    def __post_init__(self):
        d = np.atleast_1d(np.asarray(self.delta, dtype=float))
        if d.ndim != 1:
            raise ValueError("shift must be a 1-d array")
        if np.any(d < 0.0) or np.any(d >= 1.0):
            raise ValueError("shift components must lie in [0, 1)")
        object.__setattr__(self, "delta", _frozen(d))

    @property
    def s(self) -> int:
        return self.delta.shape[0]


@dataclass(frozen=True)
class PointSet:
    """Immutable ``(n, s)`` array of cubature nodes plus how it was produced."""

    nodes: np.ndarray
    provenance: str = PLAIN
    shift: Shift | None = field(default=None, compare=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim == 1:
            nodes = nodes[:, None]
        if nodes.ndim != 2 or nodes.shape[0] < 1 or nodes.shape[1] < 1:
            raise ValueError(f"nodes must be a non-empty (n, s) array, got {nodes.shape}")
        if self.provenance not in _PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.provenance == SHIFTED_TENT:
            ok = np.all((nodes >= 0.0) & (nodes <= 1.0))
        else:
            ok = np.all((nodes >= 0.0) & (nodes < 1.0))
        if not ok:
            raise ValueError(f"nodes outside the admissible range for {self.provenance}")
        object.__setattr__(self, "nodes", _frozen(nodes))

    @property
    def n(self) -> int:
        return self.nodes.shape[0]

    @property
    def s(self) -> int:
        return self.nodes.shape[1]

    def __len__(self):
        return self.n


def generate_lattice(gv: GeneratingVector) -> PointSet:
    """Nodes ``{k z / n}`` for ``k = 0, ..., n-1``.

    The residue ``k z mod n`` is formed in integer arithmetic, so every
    node is an exact multiple of ``1/n`` (for ``n`` a power of two) and
    lies in ``[0, 1)``.
    """
    k = np.arange(gv.n, dtype=np.int64)[:, None]
    z = np.asarray(gv.z, dtype=np.int64)[None, :] % gv.n
    return PointSet((k * z % gv.n) / gv.n, PLAIN)


def sample_shift(seed: int, s: int) -> Shift:
    if s < 1:
        raise ValueError(f"dimension must be positive, got {s}")
    rng = np.random.Generator(np.random.PCG64(seed))
    return Shift(rng.random(s))


def apply_shift(ps: PointSet, d: Shift) -> PointSet:
    if d.s != ps.s:
        raise ValueError(f"shift has dimension {d.s}, point set has {ps.s}")
    return PointSet(frac(ps.nodes + d.delta[None, :]), SHIFTED, shift=d)


def tent_transform(ps: PointSet) -> PointSet:
    """Apply the baker's map ``t -> 1 - |2t - 1|`` to every coordinate."""
    x = ps.nodes
    if np.any((x < 0.0) | (x > 1.0)):
        raise ValueError("tent transform expects nodes in [0, 1]")
    return PointSet(1.0 - np.abs(2.0 * x - 1.0), SHIFTED_TENT, shift=ps.shift)


def find_duplicate_rows(ps: PointSet | np.ndarray) -> list[tuple[int, int]]:
    """Index pairs ``(i, j)``, ``i < j``, of rows that are bitwise equal."""
    x = ps.nodes if isinstance(ps, PointSet) else np.asarray(ps, dtype=float)
    x = np.ascontiguousarray(x)
    _, inverse, counts = np.unique(x, axis=0, return_inverse=True, return_counts=True)
    if np.all(counts == 1):
        return []
    inverse = inverse.reshape(-1)
    pairs = []
    for group in np.flatnonzero(counts > 1):
        idx = np.flatnonzero(inverse == group)
        pairs.extend((int(idx[0]), int(j)) for j in idx[1:])
    return sorted(pairs)


def check_distinct(ps: PointSet) -> None:
    pairs = find_duplicate_rows(ps)
    if pairs:
        raise DuplicatePointsError(pairs)


def load_generating_vector(path, s: int, n: int) -> GeneratingVector:
    """Read the first ``s`` components of a generating vector from ``path``.

    The file holds one integer per line, or ``index value`` pairs; blank
    lines and lines starting with ``#`` are skipped. Published extensible
    vectors target a larger point count, so every component is reduced
    mod ``n``; a component divisible by ``n`` is rejected.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"generating vector file not found: {path}")
    values = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (1, 2):
            raise ValueError(f"{path}:{lineno}: expected 1 or 2 columns, got {len(parts)}")
        try:
            values.append(int(parts[-1]))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: not an integer: {parts[-1]!r}") from exc
    if len(values) < s:
        raise ValueError(f"{path} holds {len(values)} components, need {s}")
    z = [v % n if n > 1 else v for v in values[:s]]
    if n > 1 and any(v == 0 for v in z):
        bad = [j for j, v in enumerate(z) if v == 0]
        raise ValueError(f"components {bad} of {path} are divisible by n={n}")
    if n == 1:
        z = [1] * s
    return GeneratingVector(n, tuple(z))
