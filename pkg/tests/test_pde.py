import math

import mpmath
import numpy as np
import pytest
import scipy.sparse
from hypothesis import given, settings, strategies as st

from latticekc.pde import (
    UqConfig,
    _assembler,
    diffusion_coeff,
    make_mesh,
    pod_weights_uq,
    qoi,
    qoi_batch,
    riemann_zeta,
    run_uq_experiment,
    solve_pde,
    to_parameters,
)
from latticekc.points import GeneratingVector


@pytest.mark.parametrize("x", [1.05, 1.5, 1.0526315789473684, 2.0, 3.3, 4.0, 10.0])
def test_zeta_against_mpmath(x):
    assert riemann_zeta(x) == pytest.approx(float(mpmath.zeta(x)), rel=1e-14)


def test_zeta_against_partial_sum():
    k = np.arange(1, 10**7 + 1, dtype=float)
    partial = math.fsum(k**-3.0)
    tail = 0.5 / 1e14  # integral tail of k^-3 beyond 1e7
    assert riemann_zeta(3.0) == pytest.approx(partial + tail, rel=1e-13)


def test_zeta_exact_values():
    assert riemann_zeta(2.0) == pytest.approx(math.pi**2 / 6, rel=1e-15)
    assert riemann_zeta(4.0) == pytest.approx(math.pi**4 / 90, rel=1e-15)
    with pytest.raises(ValueError):
        riemann_zeta(1.0)


def test_pod_weights_structure():
    w = pod_weights_uq(6)
    lam = 1 / (2 - 2 * 0.05)
    p = 2 / (1 + lam)
    assert w.scheme == "pod" and w.Gamma[0] == 1.0
    np.testing.assert_allclose(w.Gamma, [math.factorial(l) ** p for l in range(7)], rtol=1e-13)
    ratios = w.gamma_tilde[1:] / w.gamma_tilde[:-1]
    np.testing.assert_allclose(ratios, (np.arange(1, 6) / np.arange(2, 7)) ** (2 * p), rtol=1e-13)


def test_coefficient_bounds():
    rng = np.random.default_rng(0)
    x = rng.random((200, 2))
    for s in (1, 5, 100):
        y = rng.uniform(-0.5, 0.5, s)
        a = diffusion_coeff(x, y)
        assert np.all(a >= 0.5 - 0.25 * math.pi**2 / 6) and np.all(a <= 0.5 + 0.25 * math.pi**2 / 6)
    with pytest.raises(ValueError):
        diffusion_coeff(x, [0.6])
    with pytest.raises(ValueError):
        to_parameters([[1.2]])


def test_mesh_counts():
    m = make_mesh(3)
    assert m.n_nodes == 81 and len(m.elements) == 128
    assert m.interior.size == 49
    assert m.area * len(m.elements) == pytest.approx(1.0)


def test_hat_function_integral():
    m = make_mesh(4)
    u = np.zeros(m.n_nodes)
    u[m.interior[20]] = 1.0
    assert qoi(u, m) == pytest.approx(m.h**2, rel=1e-14)
    assert qoi(np.ones(m.n_nodes), m) == pytest.approx(1.0, rel=1e-14)


def test_stiffness_symmetric_positive_definite():
    m = make_mesh(3)
    A = _assembler(m).stiffness(diffusion_coeff(m.centroids, [0.4, -0.3])).toarray()
    np.testing.assert_allclose(A, A.T, atol=1e-15)
    assert np.linalg.eigvalsh(A).min() > 0


def test_laplacian_stencil():
    m = make_mesh(3)
    A = _assembler(m).stiffness(np.ones(len(m.elements)))
    assert isinstance(A, scipy.sparse.csr_matrix)
    A = A.toarray()
    np.testing.assert_allclose(np.diag(A), 4.0)
    np.testing.assert_allclose(np.sort(A[24])[:4], -1.0)


def test_manufactured_solution_converges_quadratically():
    def f(x):
        return 2 * math.pi**2 * np.sin(math.pi * x[..., 0]) * np.sin(math.pi * x[..., 1])

    errs = []
    for L in (3, 4, 5):
        m = make_mesh(L)
        u = solve_pde(None, m, f, coeff=lambda x: np.ones(len(x)))
        exact = np.sin(math.pi * m.coords[:, 0]) * np.sin(math.pi * m.coords[:, 1])
        errs.append(np.max(np.abs(u - exact)))
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_cg_matches_direct_and_batch():
    m = make_mesh(4)
    ys = to_parameters(np.random.default_rng(1).random((3, 4)))
    batch = qoi_batch(ys, m)
    for y, g in zip(ys, batch):
        ud = solve_pde(y, m)
        uc = solve_pde(y, m, solver="cg")
        assert qoi(ud, m) == pytest.approx(g, rel=1e-12)
        np.testing.assert_allclose(uc, ud, atol=1e-10)
    with pytest.raises(ValueError):
        solve_pde(ys[0], m, solver="lu")


@given(st.lists(st.floats(-0.5, 0.5), min_size=1, max_size=6))
@settings(max_examples=20, deadline=None)
def test_solution_is_positive_for_positive_source(y):
    m = make_mesh(3)
    u = solve_pde(np.array(y), m)
    assert np.all(u[m.interior] > 0)
    assert np.all(u[m.boundary] == 0)


def test_uq_config_validation():
    with pytest.raises(ValueError):
        UqConfig(s=1, ns=(3,))
    with pytest.raises(ValueError):
        UqConfig(s=1, methods=("mc",))
    with pytest.raises(ValueError):
        UqConfig(s=1, shifted=False)
    assert UqConfig(s=2).digest() != UqConfig(s=2, seed=1).digest()


def test_unshifted_full_rule_reproduces_reference():
    gv = GeneratingVector(64, (1, 19))
    cfg = UqConfig(s=2, level=2, ns=(64,), R=1, n_ref=64, shifted=False)
    res = run_uq_experiment(cfg, gv)
    assert all(r["rms_error"] == 0.0 for r in res.rows)


def test_uq_rows_and_jobs_independence():
    gv = GeneratingVector(64, (1, 19))
    cfg = UqConfig(s=2, level=2, ns=(2, 4, 8, 16, 32), R=2, n_ref=64)
    a = run_uq_experiment(cfg, gv)
    b = run_uq_experiment(cfg, gv, jobs=2)
    assert a.rows == b.rows
    assert {r["method"] for r in a.rows} == {"qmc", "kernel"}
    assert set(a.slopes) == {"qmc_error", "qmc_wce", "kernel_error", "kernel_wce"}
