import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gamma

from subdiffusion_pint.bfsm import NewtonDivergence, bfsm_linear, bfsm_semilinear
from subdiffusion_pint.diagnostics import dense_assemble
from subdiffusion_pint.krylov import KrylovConfig
from subdiffusion_pint.newton import NewtonConfig, coarse_initial_guess, solve_semilinear
from subdiffusion_pint.problems import (
    Problem,
    fisher,
    get_problem,
    make_system,
    problem_example1,
    problem_example2,
    register_problem,
)
from subdiffusion_pint.solvers import solve_linear
from subdiffusion_pint.system import assemble_forcing, rhs_eta

# 30-digit mpmath / sympy evaluations
EX1_U000 = 0.398991513790098912  # (1 + 0) * (1 + e^-9) / sqrt(2 pi)
EX1_F001_HALF = 1.67524819708743399


def rel_max(a, b):
    return np.abs(a - b).max() / np.abs(b).max()


class TestProblems:
    def test_example1_initial_value(self):
        p = problem_example1(0.5)
        assert p.initial(np.array([0.0]), np.array([0.0]))[0] == pytest.approx(EX1_U000, rel=1e-15)

    def test_example1_source_value(self):
        p = problem_example1(0.5)
        assert p.forcing(np.array([0.0]), np.array([0.0]), 1.0)[0] == pytest.approx(EX1_F001_HALF, rel=1e-13)

    @pytest.mark.parametrize("beta", [0.2, 0.7])
    def test_example1_source_by_caputo_quadrature(self, beta):
        # f = D^beta u - Laplacian u; Caputo derivative by direct quadrature of the definition
        p = problem_example1(beta)
        sigma = 2.2 - beta
        t, x, y = 0.8, 0.5, -0.3
        dphi = lambda s: s ** (sigma - 1) / gamma(sigma)  # d/ds xi_{1+sigma}(s)
        cap, _ = quad(lambda s: dphi(s) / gamma(1 - beta), 0, t, weight="alg", wvar=(0.0, -beta),
                      epsabs=0, epsrel=1e-12)
        space = p.exact(np.array([x]), np.array([y]), 0.0)[0]  # c * bumps
        h = 1e-3
        lap = sum(p.exact(np.array([x + dx]), np.array([y + dy]), t)[0]
                  for dx, dy in ((h, 0), (-h, 0), (0, h), (0, -h)))
        lap = (lap - 4 * p.exact(np.array([x]), np.array([y]), t)[0]) / h**2
        ref = cap * space - lap
        assert p.forcing(np.array([x]), np.array([y]), t)[0] == pytest.approx(ref, rel=1e-6)

    def test_example2(self):
        p = problem_example2()
        assert not p.is_linear and p.forcing is None
        assert fisher(np.array([0.5]))[0] == 0.25

    def test_registry(self):
        register_problem("heat_zero", lambda beta: Problem("heat_zero", (0, 1, 0, 1), 1.0, 1.0,
                                                           lambda x, y: np.zeros_like(x)))
        assert get_problem("heat_zero", 0.5).name == "heat_zero"
        with pytest.raises(KeyError):
            get_problem("nope", 0.5)
        with pytest.raises(ValueError):
            problem_example1(1.0)

    def test_make_system_split(self):
        sys = make_system(problem_example1(0.5), 0.5, 32, 8, 3.0)
        assert sys.M0 == 10 and sys.mesh.T0 == 0.125 and sys.n_space == 49


class TestLinear:
    def test_bfsm_equals_dense_direct(self):
        sys = make_system(problem_example1(0.3), 0.3, 8, 4, 2.0)
        Md = dense_assemble(sys, "M")
        e1, e2 = rhs_eta(sys)
        f1, f2 = assemble_forcing(sys)
        ref = np.linalg.solve(Md, (np.vstack([e1, e2]) + np.vstack([f1, f2])).ravel()).reshape(sys.M, -1)
        assert rel_max(bfsm_linear(sys), ref) < 1e-12

    @pytest.mark.parametrize("precondition", [True, False])
    def test_all_at_once_matches_bfsm(self, precondition):
        sys = make_system(problem_example1(0.5), 0.5, 16, 8, 2.0)
        res = solve_linear(sys, precondition=precondition)
        assert res.converged
        assert rel_max(res.solution, bfsm_linear(sys)) < 1e-7

    def test_preconditioning_cuts_iterations(self):
        sys = make_system(problem_example1(0.1), 0.1, 16, 16, 2.0)
        p = solve_linear(sys).iterations
        i = solve_linear(sys, precondition=False).iterations
        assert p[0] < i[0] and p[1] < i[1]

    def test_error_decreases(self):
        errs = []
        for n in (8, 16):
            p = problem_example1(0.5)
            sys = make_system(p, 0.5, n, n, 2.0)
            u = bfsm_linear(sys)
            x, y = sys.op.grid()
            errs.append(np.abs(u[-1] - p.exact(x, y, 1.0)).max())
        assert errs[1] < errs[0]

    def test_check_hook_aborts(self):
        sys = make_system(problem_example1(0.5), 0.5, 8, 4, 2.0)

        def check(k):
            if k == 3:
                raise RuntimeError("stop")

        with pytest.raises(RuntimeError):
            bfsm_linear(sys, check)


@pytest.fixture(scope="module")
def sys2():
    return make_system(problem_example2(), 0.5, 16, 8, 2.0)


class TestSemilinear:
    def test_newton_matches_bfsm(self, sys2):
        u, rep = solve_semilinear(sys2, fisher)
        assert all(rep.converged)
        ref = bfsm_semilinear(sys2, fisher)
        assert rel_max(u, ref.solution) < 1e-8
        assert 1 <= ref.iter1 < 20

    def test_linear_case_reduces_to_linear_solve(self):
        sys = make_system(problem_example1(0.5), 0.5, 16, 8, 2.0)
        u, rep = solve_semilinear(sys, None)
        assert rep.iter_outer == (1, 1)
        assert rel_max(u, bfsm_linear(sys)) < 1e-5
        b = bfsm_semilinear(sys, None)
        assert np.all(b.newton_counts == 0)

    def test_coarse_guess_is_close(self, sys2):
        g1, g2 = coarse_initial_guess(sys2, fisher)
        ref = bfsm_semilinear(sys2, fisher).solution
        guess = np.vstack([g1, g2])
        assert guess.shape == ref.shape
        assert rel_max(guess, ref) < 0.2

    def test_coarse_guess_fallback(self):
        sys = make_system(problem_example2(), 0.5, 3, 4, 2.0)
        g1, g2 = coarse_initial_guess(sys, fisher)
        assert not g1.any() and not g2.any()

    def test_divergence_reported(self, sys2):
        blowup = lambda u: 1e3 * np.sign(u) * np.abs(u) ** 1.5  # noqa: E731
        with pytest.raises(NewtonDivergence):
            solve_semilinear(sys2, blowup, NewtonConfig(max_outer=3))
        with pytest.raises(NewtonDivergence):
            bfsm_semilinear(sys2, blowup, max_iter=2)

    def test_unpreconditioned_newton(self, sys2):
        u, rep = solve_semilinear(sys2, fisher, NewtonConfig(precondition=False,
                                                             inner=KrylovConfig(rtol=1e-8)))
        assert all(rep.converged)
        ref = bfsm_semilinear(sys2, fisher).solution
        assert rel_max(u, ref) < 1e-7
        assert min(rep.iter_inner_avg) > 1

    def test_config_validation(self):
        with pytest.raises(ValueError):
            NewtonConfig(coarsening=0)
        with pytest.raises(ValueError):
            NewtonConfig(step_rtol=0)
