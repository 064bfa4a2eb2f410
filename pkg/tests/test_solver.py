import numpy as np
import pytest
from hypothesis import given, strategies as st

from halfliouville import curves as cv
from halfliouville import solver as sv
from halfliouville import spectral as sp
from halfliouville.spectral import TWO_PI

from conftest import random_trig_factor


def test_residual_vanishes_on_circle_and_moebius_factor():
    assert np.max(np.abs(sv.residual(np.zeros(64), np.ones(64)))) < 1e-15
    lam = sv.moebius_solution(0.4 + 0.3j, c0=2.0)
    assert np.max(np.abs(sv.residual(lam, np.full(lam.n, 2.0)))) < 1e-12


def test_residual_grid_mismatch():
    with pytest.raises(ValueError, match="grid mismatch"):
        sv.residual(np.zeros(64), np.ones(32))


def test_moebius_solution_refines_grid():
    lam = sv.moebius_solution(0.95, n=64)
    assert lam.n >= cv.MoebiusMap(0.95).resolution()
    assert sp.tail_energy_fraction(lam.lam) < 1e-16
    with pytest.raises(ValueError):
        sv.moebius_solution(0.1, c0=0.0)


def test_unit_curvature_converges_to_moebius_factor():
    n = 256
    init = 0.05 * np.cos(sp.grid(n)) - 0.02 * np.sin(2 * sp.grid(n))
    rep = sv.solve(np.ones(n), init=init)
    assert rep.converged and rep.residual_sup <= 1e-10
    assert rep.constraint_gap < 1e-9
    # the Moebius family shows up as a two-dimensional near-kernel
    assert rep.near_kernel_dim == 2
    fit = cv.fit_moebius(cv.immersion_from_factor(rep.solution))
    assert fit.sup_error <= 1e-6


def test_constant_curvature_shift():
    rep = sv.solve(np.full(128, 3.0))
    assert np.max(np.abs(rep.solution.lam + np.log(3.0))) < 1e-14
    assert rep.iterations == 0


def test_cosine_perturbation_is_obstructed():
    n = 256
    th = sp.grid(n)
    kappa = 1.0 + 0.1 * np.cos(th)
    with pytest.raises(sv.SolverError) as info:
        sv.solve(kappa, max_iter=20)
    rep = info.value.report
    assert not rep.converged
    assert rep.residual_sup > 1e-3
    lam = rep.solution.lam
    moment = sv.balance_moment(lam, kappa)
    # Im of the moment is -eps int sin^2 exp(lam), bounded away from zero
    expected = -0.1 * sp.integrate_circle(np.sin(th) ** 2 * np.exp(lam))
    assert moment.imag == pytest.approx(expected, abs=1e-12)
    assert moment.imag < -0.1


@given(st.integers(0, 2 ** 32 - 1), st.floats(-0.5, 0.5))
def test_moment_formula_for_any_factor(seed, eps):
    rng = np.random.default_rng(seed)
    lam = random_trig_factor(rng, n=128)
    th = sp.grid(128)
    m = sv.balance_moment(lam, 1.0 + eps * np.cos(th))
    assert m.imag == pytest.approx(-eps * sp.integrate_circle(np.sin(th) ** 2 * np.exp(lam)), abs=1e-12)


@given(st.integers(0, 2 ** 32 - 1))
def test_balance_moment_vanishes_on_solutions(seed):
    # every factor solves the equation for its own curvature
    lam = random_trig_factor(np.random.default_rng(seed), n=128)
    kappa = cv.curvature_from_factor(lam, on_alias="ignore")
    assert abs(sv.balance_moment(lam, kappa)) < 1e-11


def test_attainable_nonconstant_curvature():
    n = 256
    th = sp.grid(n)
    lam0 = 0.2 * np.cos(th) + 0.1 * np.sin(2 * th)
    kappa = cv.curvature_from_factor(lam0)
    rep = sv.solve(kappa)
    assert rep.residual_sup <= 1e-10
    assert rep.iterations <= 15
    assert rep.near_kernel_dim == 0
    assert np.max(np.abs(cv.curvature_from_factor(rep.solution) - kappa)) <= 1e-8
    assert np.max(np.abs(rep.solution.lam - lam0)) < 1e-10
    assert rep.history[0] > rep.history[-1]


def test_translation_covariance():
    n = 256
    th = sp.grid(n)
    lam0 = 0.3 * np.sin(th) + 0.1 * np.cos(3 * th)
    kappa = cv.curvature_from_factor(lam0)
    a = sv.solve(kappa).solution.lam
    b = sv.solve(sv.rotate(kappa, 17)).solution.lam
    assert np.max(np.abs(sv.rotate(a, 17) - b)) < 1e-10


def test_scaling_covariance():
    # kappa -> c kappa shifts lam by -log c
    n = 128
    th = sp.grid(n)
    kappa = cv.curvature_from_factor(0.2 * np.cos(2 * th))
    a = sv.solve(kappa).solution.lam
    b = sv.solve(2.5 * kappa).solution.lam
    assert np.max(np.abs(b - (a - np.log(2.5)))) < 1e-10


@pytest.mark.filterwarnings("ignore:initial mass")
def test_warnings():
    with pytest.warns(RuntimeWarning, match="nonpositive mean"):
        with pytest.raises(sv.SolverError):
            sv.solve(-np.ones(32), max_iter=3)
    with pytest.warns(RuntimeWarning, match="far from"):
        sv.solve(np.ones(32), init=np.full(32, 2.0))


def test_init_grid_mismatch():
    with pytest.raises(ValueError):
        sv.solve(np.ones(32), init=np.zeros(16))


def test_prescribed_curvature_builders():
    k = sv.PrescribedCurvature.trig(1.0, cos=(0.1,), sin=(0.0, 0.2), n=64)
    th = sp.grid(64)
    assert np.allclose(k.kappa, 1 + 0.1 * np.cos(th) + 0.2 * np.sin(2 * th))
    assert sv.PrescribedCurvature.constant(2.0, n=16).n == 16
    with pytest.raises(ValueError):
        sv.PrescribedCurvature(np.array([1.0, np.inf, 1.0, 1.0]))


def test_report_to_dict():
    rep = sv.solve(sv.PrescribedCurvature.constant(1.0, n=32))
    d = rep.to_dict()
    assert d["converged"] and d["iterations"] == 0 and len(d["lam"]) == 32


def test_half_laplacian_matrix_matches_fft():
    u = random_trig_factor(np.random.default_rng(2), n=64)
    assert np.max(np.abs(sv.half_laplacian_matrix(64) @ u - sp.half_laplacian(u))) < 1e-13


def test_solver_runtime_budget():
    import time
    t0 = time.perf_counter()
    sv.solve(cv.curvature_from_factor(0.2 * np.cos(sp.grid(256))))
    assert time.perf_counter() - t0 < 5.0
