import csv

import numpy as np
import pytest

from subdiffusion_pint.diagnostics import (
    SPECTRUM_TAGS,
    SDDViolation,
    SizeGuardError,
    _sdd_recursions,
    bound_constant,
    decay_profile,
    dense_assemble,
    nilpotency_check,
    palpha_distance,
    q_inf_norm,
    spectrum,
    write_bound_csv,
    write_decay_csv,
    write_spectrum_csv,
)
from subdiffusion_pint.mesh import assemble_weight_table, build_mesh, uniform_weights
from subdiffusion_pint.spatial import build_operator
from subdiffusion_pint.system import AllAtOnceSystem


def make(M, M0, beta=0.5, r=2.0, N=3):
    mesh = build_mesh(1.0, 2.0**-r, M, M0, r)
    op = build_operator(N, N, (0.0, np.pi, 0.0, np.pi))
    return AllAtOnceSystem(mesh, assemble_weight_table(mesh, beta), op, np.zeros(op.size))


@pytest.mark.parametrize("M0, beta, r", [(4, 0.1, 2), (7, 0.9, 3), (9, 0.5, 2)])
def test_nilpotency(M0, beta, r):
    dev, nil, p = nilpotency_check(make(M0 + 2, M0, beta, r))
    assert p == -(-M0 // 3)
    assert dev < 1e-12
    assert nil < 1e-12


def test_nilpotency_general_eigensolver_is_less_accurate():
    # the dense eigensolver only sees eigenvalue 1 to about eps**(1/p); our read-off is exact
    sys = make(11, 9, 0.5, 2)
    P = dense_assemble(sys, "P1")
    K = np.linalg.solve(P, dense_assemble(sys, "M11"))
    general = np.max(np.abs(np.linalg.eigvals(K) - 1))
    dev, _, _ = nilpotency_check(sys)
    assert dev <= general


def test_q_inf_norm_of_identity_and_palpha_distance_agree():
    sys = make(12, 5, 0.5, 2)
    n = sys.M - sys.M0
    assert q_inf_norm(sys, np.eye(n * sys.n_space)) == pytest.approx(1.0)
    alpha = 1e-2
    W = np.eye(n * sys.n_space) - np.linalg.solve(dense_assemble(sys, "Palpha", alpha), dense_assemble(sys, "M22"))
    assert q_inf_norm(sys, W) == pytest.approx(palpha_distance(sys.weights.omega, sys.op.eig_full, alpha), rel=1e-9)


def test_q_inf_norm_shape_check():
    sys = make(8, 4)
    with pytest.raises(ValueError):
        q_inf_norm(sys, np.eye(5))


def test_size_guard():
    with pytest.raises(SizeGuardError):
        dense_assemble(make(100, 4), "M")
    with pytest.raises(ValueError):
        dense_assemble(make(8, 4), "bogus")


def test_sdd_recursions_bound_inverse():
    rng = np.random.default_rng(0)
    W = rng.uniform(-1, 1, (6, 6))
    W += np.diag(np.abs(W).sum(axis=1) + 1.0)
    z, h = _sdd_recursions(W)
    d = np.abs(np.diag(W))
    bound = np.max(z / d) / np.min(1 - h / d)
    assert np.abs(np.linalg.inv(W)).sum(axis=1).max() <= bound


@pytest.mark.parametrize("beta", [0.5, 0.9])
def test_bound_constant_linear_trend(beta):
    om = uniform_weights(beta, 0.1, 6)
    mus = build_operator(3, 3, (0, np.pi, 0, np.pi)).eig_full
    a = palpha_distance(om, mus, 1e-3)
    b = palpha_distance(om, mus, 5e-4)
    assert 1.6 <= a / b <= 2.4
    rep = bound_constant(om, 1e-3, lhs=a)
    assert rep.epsilon_max == pytest.approx(-om[1] / om[0])
    assert rep.C > 0 and rep.C_rowmax >= rep.C * (1 - 1e-12)
    assert a <= rep.rhs_rowmax


def test_bound_constant_rejects_short():
    with pytest.raises(ValueError):
        bound_constant(np.array([1.0]), 0.1)


def test_bound_constant_sdd_violation():
    with pytest.raises(SDDViolation):
        bound_constant(np.array([1.0, 0.5, 0.5, 0.5]), 1.0)


def test_decay_profile_monotone():
    prof = decay_profile(make(12, 7, 0.5, 2))
    assert prof.size == 7
    assert np.all(np.diff(prof) < 0)


@pytest.mark.parametrize("tag", ["M11", "P1invM11", "M22", "PalphaInvM22"])
def test_spectrum_matches_closed_forms(tag):
    sys = make(9, 5, 0.5, 2)
    mus = sys.op.eig_full
    got = np.sort_complex(spectrum(sys, tag, alpha=1e-2, params={"beta": 0.5}).eigenvalues)
    if tag == "M11":
        ref = np.concatenate([np.diag(sys.weights.A11) - mu for mu in mus])
    elif tag == "M22":
        ref = np.concatenate([np.full(4, sys.weights.omega[0] - mu) for mu in mus])
    elif tag == "P1invM11":
        ref = np.ones(5 * mus.size)
    else:
        # defective blocks: the dense eigensolver only resolves them to about eps**(1/n)
        K = np.linalg.solve(dense_assemble(sys, "Palpha", 1e-2), dense_assemble(sys, "M22"))
        ref = np.linalg.eigvals(K)
        np.testing.assert_allclose(got, np.sort_complex(ref), atol=1e-3)
        return
    np.testing.assert_allclose(got, np.sort_complex(ref.astype(complex)), rtol=1e-10, atol=1e-10)


def test_spectrum_tags():
    assert set(SPECTRUM_TAGS) == {"M11", "P1invM11", "M22", "PalphaInvM22"}
    with pytest.raises(ValueError):
        spectrum(make(9, 5), "nope")


def test_csv_writers(tmp_path):
    sys = make(9, 5)
    p = write_spectrum_csv(tmp_path / "s.csv", spectrum(sys, "M22"))
    rows = list(csv.reader(p.open()))
    assert rows[0] == ["re", "im"] and len(rows) == 1 + 4 * sys.n_space
    p = write_decay_csv(tmp_path / "d.csv", [3.0, 1.0])
    assert list(csv.reader(p.open()))[2] == ["1", "1.0"]
    rep = bound_constant(sys.weights, 1e-2, lhs=1e-6)
    p = write_bound_csv(tmp_path / "b.csv", [rep])
    rows = list(csv.DictReader(p.open()))
    assert rows[0]["holds"] in ("0", "1") and float(rows[0]["alpha"]) == 1e-2
