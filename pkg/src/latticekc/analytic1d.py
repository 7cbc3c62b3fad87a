"""Closed-form results for the left-Riemann lattice ``t_k = k/n`` in one dimension.

All identities refer to the smoothness-1 kernel with unit coordinate
weight,

    K(x, y) = 1 + B_2(|x - y|) / 2 + (x - 1/2)(y - 1/2),

and serve as exact oracles for the generic assembly and solve.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

__all__ = [
    "kernel_1d",
    "closed_form_weights",
    "closed_form_weights_exact",
    "closed_form_wce_optimal_sq",
    "equal_wce_sq",
    "gram_double_sum",
    "embedding_gap_l2_sq",
    "boundary_gap",
]


def _need_two(n):
    if int(n) != n or n < 2:
        raise ValueError(f"the closed forms hold for integer n >= 2, got {n!r}")
    return int(n)


def kernel_1d(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = np.abs(x - y)
    return 1.0 + 0.5 * (d * d - d + 1.0 / 6.0) + (x - 0.5) * (y - 0.5)


def closed_form_weights_exact(n: int) -> list[Fraction]:
    n = _need_two(n)
    w0 = Fraction(1, 2 * n) * Fraction(12 * n**3, 12 * n**3 + n + 3)
    return [w0] + [2 * w0] * (n - 2) + [3 * w0]


def closed_form_weights(n: int) -> np.ndarray:
    """Optimal weights: ``w_0``, then ``2 w_0`` for interior nodes, then ``3 w_0``."""
    n = _need_two(n)
    w0 = 6.0 * n * n / (12.0 * n**3 + n + 3.0)
    w = np.full(n, 2.0 * w0)
    w[0] = w0
    w[-1] = 3.0 * w0
    return w


def closed_form_wce_optimal_sq(n: int) -> Fraction:
    """``1 - sum(w*) = (n + 3) / (12 n^3 + n + 3)``."""
    n = _need_two(n)
    return Fraction(n + 3, 12 * n**3 + n + 3)


def gram_double_sum(n: int) -> Fraction:
    """Sum of all Gram entries over ``k/n``: ``(3 n^2 + 1) / 3``."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return Fraction(3 * int(n) ** 2 + 1, 3)


def equal_wce_sq(n: int) -> Fraction:
    """Squared equal-weight worst-case error, ``1 / (3 n^2)``."""
    return gram_double_sum(n) / int(n) ** 2 - 1


def embedding_gap_l2_sq(n: int) -> Fraction:
    """Squared L2(0, 1) distance between 1 and its kernel interpolant."""
    n = _need_two(n)
    return Fraction(6 * n * (n + 15), 5 * (12 * n**3 + n + 3) ** 2)


def boundary_gap(n: int) -> Fraction:
    """Interpolation gap at the right endpoint, ``1 - h_T(1) = 6n / (12 n^3 + n + 3)``."""
    n = _need_two(n)
    return Fraction(6 * n, 12 * n**3 + n + 3)
