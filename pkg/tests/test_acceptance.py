"""Exit criteria, one test per criterion, each at its stated tolerance.

A pass/fail line per criterion is printed in the terminal summary.
"""
import filecmp
import itertools
import statistics
import time

import numpy as np

from latticekc import analytic1d
from latticekc.cli import main
from latticekc.cubature import (
    assemble_gram,
    equal_rule,
    solve_optimal_weights,
    wce_equal,
    wce_general,
    wce_optimal,
)
from latticekc.experiments import data_file, run_oned, run_wce2d
from latticekc.kernel import CoordinateWeights, KernelSpec, kernel_matrix
from latticekc.pde import UqConfig, make_mesh, qoi, run_uq_experiment, solve_pde
from latticekc.points import GeneratingVector, PointSet, generate_lattice, load_generating_vector
from latticekc.rates import fit_rate


def left_riemann(n):
    return generate_lattice(GeneratingVector(n, (1,)))


def test_1_closed_form_oracles(record_criterion):
    t0 = time.perf_counter()
    spec = KernelSpec.unweighted(1, 1)
    worst = {"weights": 0.0, "wce_sq": 0.0, "gram_sum_scaled": 0.0}
    for m in range(1, 10):
        n = 2**m
        gram = assemble_gram(spec, left_riemann(n))
        rule = solve_optimal_weights(gram)
        worst["weights"] = max(worst["weights"],
                               np.max(np.abs(rule.weights - analytic1d.closed_form_weights(n))))
        closed_sq = float(analytic1d.closed_form_wce_optimal_sq(n))
        worst["wce_sq"] = max(worst["wce_sq"], abs(wce_optimal(rule) ** 2 - closed_sq))
        gsum = float(analytic1d.gram_double_sum(n))
        worst["gram_sum_scaled"] = max(worst["gram_sum_scaled"],
                                       abs(np.sum(gram.matrix) - gsum) / n**2)
    elapsed = time.perf_counter() - t0
    ok = (worst["weights"] <= 1e-10 and worst["wce_sq"] <= 1e-12
          and worst["gram_sum_scaled"] <= 1e-9 and elapsed < 30)
    detail = " ".join(f"{k}={float(v):.1e}" for k, v in worst.items())
    record_criterion("1 closed-form oracles", ok, f"{detail} time={elapsed:.2f}s")
    assert ok


def test_2_rate_doubling(record_criterion):
    t0 = time.perf_counter()
    table = run_oned([2**m for m in range(3, 11)], "exp")
    ns = table.column("n")
    s_opt = fit_rate(ns, table.column("err_optimal"))
    s_eq = fit_rate(ns, table.column("err_equal"))
    elapsed = time.perf_counter() - t0
    ok = s_opt <= -1.9 and -1.05 <= s_eq <= -0.95 and elapsed < 10
    record_criterion("2 rate doubling", ok,
                     f"optimal={s_opt:.3f} equal={s_eq:.3f} time={elapsed:.2f}s")
    assert ok


def _schemes(s, rng):
    gt = rng.uniform(0.1, 1.0, s)
    yield KernelSpec(1, CoordinateWeights.product(gt))
    Gamma = np.concatenate([[1.0], rng.uniform(0.2, 2.0, s)])
    yield KernelSpec(2, CoordinateWeights.pod(Gamma, gt))


def test_3_wce_algebraic_consistency(record_criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst_opt = worst_eq = 0.0
    violations = 0
    for s, n in [(1, 16), (2, 64), (3, 128), (5, 256)]:
        ps = PointSet(rng.random((n, s)))
        for spec in _schemes(s, rng):
            gram = assemble_gram(spec, ps)
            rule = solve_optimal_weights(gram)
            e_gen = wce_general(spec, ps, rule.weights, gram=gram)
            worst_opt = max(worst_opt, abs(e_gen**2 - (1.0 - np.sum(rule.weights))))
            e_eq_gen = wce_general(spec, ps, equal_rule(ps).weights, gram=gram)
            worst_eq = max(worst_eq, abs(e_eq_gen - wce_equal(spec, ps, gram=gram)))
            for _ in range(100):
                w = rule.weights + rng.normal(scale=1e-3 / n, size=n) * rng.choice([1, 10, 100])
                if e_gen > wce_general(spec, ps, w, gram=gram):
                    violations += 1
    elapsed = time.perf_counter() - t0
    ok = worst_opt <= 1e-9 and worst_eq <= 1e-12 and violations == 0 and elapsed < 60
    record_criterion("3 wce consistency", ok,
                     f"opt={worst_opt:.2e} eq={worst_eq:.2e} violations={violations} "
                     f"time={elapsed:.2f}s")
    assert ok


def test_4_unit_embedding(record_criterion):
    M = 2**14
    x = (np.arange(M) + 0.5) / M
    worst = 0.0
    for alpha in (1, 2, 4):
        spec = KernelSpec.unweighted(alpha, 1)
        for y0 in (0.0, 0.3, 1.0):
            mean = np.mean(kernel_matrix(spec, x[:, None], np.array([[y0]])))
            worst = max(worst, abs(mean - 1.0))
    ok = worst <= 1e-6
    record_criterion("4 unit embedding", ok, f"max|mean-1|={worst:.2e}")
    assert ok


def _brute_force_kernel(alpha, Gamma, gt, x, y):
    from latticekc.kernel import eta_alpha

    s = len(gt)
    eta = [float(eta_alpha(alpha, x[j], y[j])) for j in range(s)]
    total = 1.0
    for size in range(1, s + 1):
        for u in itertools.combinations(range(s), size):
            total += Gamma[size] * np.prod([gt[j] * eta[j] for j in u])
    return total


def test_5_pod_correctness_and_scaling(record_criterion):
    from latticekc.kernel import kernel_eval

    rng = np.random.default_rng(5)
    worst_brute = worst_prod = 0.0
    for s in range(1, 11):
        gt = rng.uniform(0.05, 1.0, s)
        Gamma = np.concatenate([[1.0], rng.uniform(0.1, 3.0, s)])
        for alpha in (1, 2, 3, 4):
            spec = KernelSpec(alpha, CoordinateWeights.pod(Gamma, gt))
            x, y = rng.random(s), rng.random(s)
            ref = _brute_force_kernel(alpha, Gamma, gt, x, y)
            worst_brute = max(worst_brute, abs(kernel_eval(spec, x, y) - ref))
            pod1 = KernelSpec(alpha, CoordinateWeights.pod(np.ones(s + 1), gt))
            prod = KernelSpec(alpha, CoordinateWeights.product(gt))
            worst_prod = max(worst_prod, abs(kernel_eval(pod1, x, y) - kernel_eval(prod, x, y)))

    from latticekc.pde import uq_kernel_spec

    spec = uq_kernel_spec(20)
    times = {}
    for n in (256, 512):
        ps = PointSet(rng.random((n, 20)))
        runs = []
        for _ in range(5):
            t0 = time.perf_counter()
            assemble_gram(spec, ps)
            runs.append(time.perf_counter() - t0)
        times[n] = min(runs)
    ratio = times[512] / times[256]
    ok = worst_brute <= 1e-12 and worst_prod <= 1e-13 and 3 <= ratio <= 6
    record_criterion("5 POD correctness", ok,
                     f"brute={worst_brute:.1e} prod={worst_prod:.1e} time ratio={ratio:.2f}")
    assert ok


def test_6_tent_wce_study(record_criterion):
    t0 = time.perf_counter()
    gv = load_generating_vector(data_file("lattice-2d-tent.txt"), 2, 2**20)
    assert gv.z == (1, 182667)
    ns = [2**m for m in range(2, 11)]
    eq_w, opt_e, eq_e, below = [], [], [], True
    for seed in range(5):
        t = run_wce2d(gv, ns, seed)
        eq_w.append(t.slopes["wce_equal_w"][0])
        opt_e.append(t.slopes["wce_optimal_e"][0])
        eq_e.append(t.slopes["wce_equal_e"][0])
        below &= bool(np.all(t.column("wce_optimal_w") <= t.column("wce_equal_w")))
    m_eq_w, m_opt_e, m_eq_e = (statistics.median(v) for v in (eq_w, opt_e, eq_e))
    elapsed = time.perf_counter() - t0
    ok = (-2.3 <= m_eq_w <= -1.7 and m_opt_e <= m_eq_e - 0.3 and m_opt_e <= -2.2
          and below and elapsed < 300)
    record_criterion("6 tent lattice wce rates", ok,
                     f"equal H2={m_eq_w:.3f} optimal H4={m_opt_e:.3f} equal H4={m_eq_e:.3f} "
                     f"time={elapsed:.1f}s")
    assert ok


def test_7_pde_uq_desk_scale(record_criterion):
    t0 = time.perf_counter()
    slopes = {}
    for s in (1, 5):
        gv = load_generating_vector(data_file("lattice-pod-uq-m12.txt"), s, 2**12)
        cfg = UqConfig(s=s, level=4, ns=tuple(2**k for k in range(1, 10)), R=8, n_ref=2**12)
        slopes[s] = run_uq_experiment(cfg, gv).slopes
    elapsed = time.perf_counter() - t0
    ok = (slopes[1]["kernel_error"] <= -1.8 and -1.2 <= slopes[1]["qmc_error"] <= -0.8
          and slopes[5]["kernel_error"] <= -1.4 and elapsed < 900)
    record_criterion("7 PDE UQ rates", ok,
                     f"s=1 kernel={slopes[1]['kernel_error']:.3f} qmc={slopes[1]['qmc_error']:.3f}; "
                     f"s=5 kernel={slopes[5]['kernel_error']:.3f} qmc={slopes[5]['qmc_error']:.3f} "
                     f"time={elapsed:.1f}s")
    assert ok


def test_8_fem_sanity(record_criterion):
    mesh = make_mesh(4)
    y = np.array([0.3, -0.2, 0.1])
    u0 = solve_pde(y, mesh, f=lambda x: np.zeros(len(x)))
    zero_ok = np.all(u0 == 0.0)
    f = lambda x: np.sin(3 * x[..., 0]) + x[..., 1]  # noqa: E731
    u_half = solve_pde(np.zeros(2), mesh, f)
    u_one = solve_pde(None, mesh, f, coeff=lambda x: np.ones(len(x)))
    scale = float(np.max(np.abs(u_half - 2.0 * u_one)))
    G = {L: qoi(solve_pde(np.zeros(1), make_mesh(L)), make_mesh(L)) for L in (5, 6, 7)}
    ratio = (G[5] - G[6]) / (G[6] - G[7])
    ok = zero_ok and scale <= 1e-12 and 3.5 <= ratio <= 4.5
    record_criterion("8 FEM sanity", ok, f"scaling={scale:.1e} richardson={ratio:.3f}")
    assert ok


def test_9_determinism(tmp_path, record_criterion):
    cfg = tmp_path / "pde.cfg"
    cfg.write_text("dims = 1 2\nlevel = 2\nns = 2^1..2^5\nn_ref = 2^6\nR = 2\n")
    identical = True
    for study, extra in [("oned", []), ("wce2d", []), ("pde-uq", ["--config", str(cfg)])]:
        a, b = tmp_path / f"{study}-a", tmp_path / f"{study}-b"
        for out in (a, b):
            assert main([study, "--seed", "7", "--out", str(out), *extra]) == 0
        files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
        assert files
        _, mismatch, errors = filecmp.cmpfiles(a, b, [str(f) for f in files], shallow=False)
        identical &= not mismatch and not errors
    record_criterion("9 determinism", identical, "byte-identical tables for oned, wce2d, pde-uq")
    assert identical
