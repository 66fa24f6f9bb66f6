import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subdiffusion_pint.krylov import KrylovConfig, bicgstab


def test_identity_one_iteration():
    b = np.arange(1.0, 6.0)
    res = bicgstab(lambda v: v, b)
    assert res.converged and res.iterations == 1.0
    np.testing.assert_allclose(res.solution, b)


def test_exact_preconditioner_one_iteration():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((8, 8)) + 8 * np.eye(8)
    Ainv = np.linalg.inv(A)
    b = rng.standard_normal(8)
    res = bicgstab(lambda v: A @ v, b, lambda v: Ainv @ v)
    assert res.iterations == 1.0
    np.testing.assert_allclose(A @ res.solution, b, rtol=1e-10)


def test_zero_rhs():
    res = bicgstab(lambda v: 2 * v, np.zeros((3, 4)))
    assert res.converged and res.iterations == 0.0 and not res.solution.any()


@given(n=st.integers(2, 30), seed=st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_relative_residual_reached(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + 2 * n * np.eye(n)
    b = rng.standard_normal(n)
    cfg = KrylovConfig(rtol=1e-10)
    res = bicgstab(lambda v: A @ v, b, config=cfg)
    assert res.converged
    assert np.linalg.norm(b - A @ res.solution) <= 1.01e-10 * np.linalg.norm(b)
    assert res.iterations == int(res.iterations)
    assert res.residual_history[0] == 1.0


def test_block_shaped_vectors():
    d = np.linspace(1, 3, 12).reshape(3, 4)
    res = bicgstab(lambda v: d * v, np.ones((3, 4)))
    np.testing.assert_allclose(res.solution, 1 / d, rtol=1e-8)


def test_maxit_reported():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((50, 50))
    res = bicgstab(lambda v: A @ v, rng.standard_normal(50), config=KrylovConfig(rtol=1e-14, maxit=2))
    assert not res.converged and res.exceeded_maxit and res.iterations == 2


def test_rho_breakdown():
    # r_hat orthogonal to A r: skew matrix, denominator vanishes
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    res = bicgstab(lambda v: A @ v, np.array([1.0, 0.0]))
    assert not res.converged and res.breakdown == "rho"


def test_callback_can_abort():
    class Stop(Exception):
        pass

    def cb(it, rel):
        raise Stop

    with pytest.raises(Stop):
        bicgstab(lambda v: 2 * v + np.roll(v, 1), np.ones(5), callback=cb)


def test_nonfinite_rhs():
    with pytest.raises(ValueError):
        bicgstab(lambda v: v, np.array([np.nan, 1.0]))


@pytest.mark.parametrize("kw", [{"rtol": 0.0}, {"rtol": 1.0}, {"maxit": 0}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        KrylovConfig(**kw)
