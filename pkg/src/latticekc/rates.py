"""Empirical convergence rates from (n, error) series."""
from __future__ import annotations

import logging

import numpy as np

__all__ = ["fit_rate", "default_window"]

log = logging.getLogger(__name__)


def fit_rate(ns, errs) -> float:
    """Least-squares slope of ``log2(err)`` against ``log2(n)``.

    Pairs with a zero error are dropped (with a warning); at least three
    usable pairs are required.
    """
    ns = np.asarray(ns, dtype=float).reshape(-1)
    errs = np.asarray(errs, dtype=float).reshape(-1)
    if ns.shape != errs.shape:
        raise ValueError(f"{ns.size} sizes for {errs.size} errors")
    if np.any(ns <= 0) or np.any(errs < 0) or not np.all(np.isfinite(errs)):
        raise ValueError("sizes must be positive and errors finite and nonnegative")
    keep = errs > 0
    if not np.all(keep):
        log.warning("dropping %d zero error(s) from the rate fit", int(np.sum(~keep)))
    if np.sum(keep) < 3:
        raise ValueError(f"need at least 3 positive errors for a rate fit, got {int(np.sum(keep))}")
    slope, _ = np.polyfit(np.log2(ns[keep]), np.log2(errs[keep]), 1)
    return float(slope)


def default_window(ns, skip: int = 2):
    """Boolean mask excluding the ``skip`` smallest sizes (pre-asymptotic regime)."""
    ns = np.asarray(ns)
    order = np.argsort(ns, kind="stable")
    mask = np.ones(ns.shape, dtype=bool)
    mask[order[:skip]] = False
    return mask
