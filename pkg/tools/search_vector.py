"""Offline search for an extensible lattice generating vector (dev tool).

Not part of the library: the package only *loads* generating vectors.
This script produced ``src/latticekc/data/lattice-pod-uq-m12.txt``, the vector used by
the PDE study, by a greedy component-by-component search over odd
candidates in ``{1, ..., 2**m_max - 1}``. The criterion is the
shift-averaged squared worst-case error for the smoothness-1 kernel with
the study's POD weights; a candidate is scored by its worst ratio to the
best attainable value over all sizes ``n = 2**m``, ``m = 1..m_max``,
so the vector stays good for every power of two up to ``2**m_max``.

Run: python tools/search_vector.py --s 100 --m-max 12 --out src/latticekc/data/lattice-pod-uq-m12.txt
"""
import argparse

import numpy as np

from latticekc.pde import pod_weights_uq


def search(s, m_max, delta):
    N = 2**m_max
    weights = pod_weights_uq(s, delta)
    gt, Gamma = weights.gamma_tilde, weights.Gamma
    k = np.arange(N)
    cand = np.arange(1, N, 2)
    x = (np.outer(cand, k) % N) / N
    omega = x * x - x + 1.0 / 6.0  # shift-averaged eta_1: B_2({k z / N})
    levels = [np.arange(0, N, N >> m) for m in range(1, m_max + 1)]
    P = [np.ones(N)] + [np.zeros(N) for _ in range(s)]
    z = []
    for j in range(s):
        A = sum(Gamma[l] * P[l] for l in range(1, j + 1)) if j else np.zeros(N)
        B = sum(Gamma[l] * P[l - 1] for l in range(1, j + 2))
        scores = np.empty((m_max, cand.size))
        for i, idx in enumerate(levels):
            scores[i] = A[idx].mean() + gt[j] * (omega[:, idx] @ B[idx]) / idx.size
        if j == 0:
            best = 0  # z_1 = 1
        else:
            ratio = scores / scores.min(axis=1, keepdims=True)
            best = int(np.argmin(ratio.max(axis=0)))
        zj = int(cand[best])
        z.append(zj)
        row = omega[best]
        for l in range(j + 1, 0, -1):
            P[l] = P[l] + gt[j] * row * P[l - 1]
        print(f"component {j + 1}: z = {zj}, e^2(n=2^{m_max}) = {scores[-1, best]:.4e}")
    return z


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--s", type=int, default=100)
    ap.add_argument("--m-max", type=int, default=12)
    ap.add_argument("--delta", type=float, default=0.05)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()
    z = search(args.s, args.m_max, args.delta)
    with open(args.out, "w") as fh:
        fh.write(f"# extensible rank-1 lattice, n = 2^1..2^{args.m_max}, s <= {args.s}\n")
        fh.write(f"# POD weights of the PDE study, smoothness 1, delta = {args.delta}\n")
        fh.write("# generated by tools/search_vector.py; columns: index value\n")
        for j, v in enumerate(z, start=1):
            fh.write(f"{j} {v}\n")


if __name__ == "__main__":
    main()
