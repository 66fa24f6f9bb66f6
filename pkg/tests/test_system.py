import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import toeplitz

from subdiffusion_pint.diagnostics import dense_assemble
from subdiffusion_pint.mesh import assemble_weight_table, build_mesh
from subdiffusion_pint.spatial import build_operator, laplacian_matrix
from subdiffusion_pint.system import (
    FFT_THRESHOLD,
    AllAtOnceSystem,
    apply_M,
    apply_M11,
    apply_M21,
    apply_M22,
    assemble_forcing,
    rhs_eta,
    toeplitz_lower_matvec,
)


def small_system(M=12, M0=5, r=2.0, beta=0.5, N=4, forcing=None, **kw):
    mesh = build_mesh(1.0, 0.3, M, M0, r)
    wt = assemble_weight_table(mesh, beta)
    op = build_operator(N, N + 1, (0.0, 1.0, 0.0, 2.0))
    x, y = op.grid()
    return AllAtOnceSystem(mesh, wt, op, np.sin(np.pi * x) * y, forcing, **kw)


def dense_M(sys):
    A = sys.weights.full()
    B = laplacian_matrix(sys.op)
    return np.kron(A, np.eye(sys.n_space)) - np.kron(np.eye(sys.M), B)


@pytest.mark.parametrize("beta", [0.1, 0.9])
def test_blocks_against_kronecker(beta):
    sys = small_system(beta=beta)
    rng = np.random.default_rng(1)
    v = rng.standard_normal((sys.M, sys.n_space))
    Md = dense_M(sys)
    ref = (Md @ v.ravel()).reshape(v.shape)
    np.testing.assert_allclose(apply_M(sys, v), ref, rtol=1e-12, atol=1e-10)
    m0, ns = sys.M0, sys.n_space
    np.testing.assert_allclose(apply_M11(sys, v[:m0]).ravel(), Md[:m0 * ns, :m0 * ns] @ v[:m0].ravel(),
                               rtol=1e-12, atol=1e-10)
    np.testing.assert_allclose(apply_M21(sys, v[:m0]).ravel(), Md[m0 * ns:, :m0 * ns] @ v[:m0].ravel(),
                               rtol=1e-12, atol=1e-10)
    np.testing.assert_allclose(apply_M22(sys, v[m0:]).ravel(), Md[m0 * ns:, m0 * ns:] @ v[m0:].ravel(),
                               rtol=1e-12, atol=1e-10)


def test_dense_assemble_agrees():
    sys = small_system()
    np.testing.assert_allclose(dense_assemble(sys, "M"), dense_M(sys), atol=1e-12)


@given(n=st.integers(1, 80), k=st.integers(1, 4), seed=st.integers(0, 2**31))
@settings(max_examples=50, deadline=None)
def test_toeplitz_paths_agree(n, k, seed):
    rng = np.random.default_rng(seed)
    col = rng.standard_normal(n)
    v = rng.standard_normal((n, k))
    ref = toeplitz(col, np.zeros(n)) @ v
    for method in ("direct", "fft", "auto"):
        np.testing.assert_allclose(toeplitz_lower_matvec(col, v, method), ref,
                                   rtol=1e-10, atol=1e-10 * np.abs(ref).max())


def test_fft_threshold_both_sides():
    for M in (FFT_THRESHOLD - 1 + 5, FFT_THRESHOLD + 5, 60):
        sys = small_system(M=M, M0=5)
        v = np.random.default_rng(M).standard_normal((M - 5, sys.n_space))
        np.testing.assert_allclose(apply_M22(sys, v, "fft"), apply_M22(sys, v, "direct"), rtol=1e-10, atol=1e-10)


def test_unknown_method():
    with pytest.raises(ValueError):
        toeplitz_lower_matvec(np.ones(3), np.ones((3, 1)), "magic")


def test_shape_checks():
    sys = small_system()
    with pytest.raises(ValueError):
        apply_M11(sys, np.zeros((sys.M, sys.n_space)))
    with pytest.raises(ValueError):
        AllAtOnceSystem(sys.mesh, sys.weights, sys.op, np.zeros(3))


def test_eta_and_forcing():
    calls = []

    def f(x, y, t):
        calls.append(t)
        return t * x

    sys = small_system(forcing=f, store_forcing=True)
    e1, e2 = rhs_eta(sys)
    np.testing.assert_allclose(e1[0], sys.weights.eta_coeffs[0] * sys.u0)
    assert e1.shape[0] + e2.shape[0] == sys.M
    f1, f2 = assemble_forcing(sys)
    x, _ = sys.op.grid()
    np.testing.assert_allclose(f2[-1], x)
    np.testing.assert_allclose(f1[0], sys.mesh.points[1] * x)
    assemble_forcing(sys)
    assert len(calls) == sys.M  # cached second time


def test_zero_forcing_and_scalar_forcing():
    sys = small_system()
    f1, f2 = assemble_forcing(sys)
    assert not f1.any() and not f2.any()
    sys = small_system(forcing=lambda x, y, t: 2.0)
    assert np.all(assemble_forcing(sys)[1] == 2.0)
