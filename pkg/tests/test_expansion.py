import numpy as np
import pytest

import sppbif as s
from sppbif.expansion import ExpansionError, BorderedSolver
from sppbif.grid import assemble_operator, gamma_on_grid
from sppbif.continuation import pt_defect

from conftest import case2_stack, grid_builder


@pytest.fixture(scope="module")
def eig2_nochi3():
    return s.solve_eigenpair(case2_stack(chi3=0.0), grid_builder(512),
                             3.83, (3.7, 3.95))


def test_nu_zero_without_nonlinearity(eig2_nochi3):
    assert s.first_order_coefficient(eig2_nochi3) == 0.0
    phi_c, defect = s.first_order_correction(eig2_nochi3, 0.0)
    assert s.norm(phi_c) <= 1e-10


def test_sigma_zero_without_nonlinearity(eig2_nochi3):
    exp = s.expand(eig2_nochi3)
    sec = s.second_order_correction(eig2_nochi3, exp, 1e-3)
    assert abs(sec.sigma) <= 1e-10
    assert s.norm(sec.psi) <= 1e-8


def test_nu_values(exp2, exp3):
    assert exp2.nu.real == pytest.approx(-7.4226, rel=0.01)
    assert exp3.nu.real == pytest.approx(-2.7233, rel=0.01)


def test_nu_formula_consistency(eig2, exp2):
    g = gamma_on_grid(eig2.grid, eig2.stack, eig2.omega0)
    v = eig2.phi0.values
    cube = s.ComplexField(eig2.grid, g * np.abs(v) ** 2 * v)
    lhs = exp2.nu * eig2.transversality
    rhs = -s.inner(cube, eig2.phi0_star)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))


def test_phi_correction_properties(eig2, exp2):
    assert exp2.solvability_defect <= 1e-8
    assert abs(s.inner(exp2.phi_corr, eig2.phi0_star)) <= 1e-10
    assert pt_defect(exp2.phi_corr, 0.5) <= 1e-6
    # complement-equation residual: Q0 L(omega0) phi_c = Q0 r
    grid = eig2.grid
    L = assemble_operator(grid, eig2.stack, eig2.omega0, scheme=eig2.scheme)
    from sppbif.grid import assemble_operator_domega
    D1 = assemble_operator_domega(grid, eig2.stack, eig2.omega0, 1, eig2.scheme)
    g = gamma_on_grid(grid, eig2.stack, eig2.omega0)
    v = eig2.phi0.values
    r = g * np.abs(v) ** 2 * v - exp2.nu * D1.matvec(v)
    lhs = s.complement_projection(
        s.ComplexField(grid, L.matvec(exp2.phi_corr.values)), eig2)
    rhs = s.complement_projection(s.ComplexField(grid, r), eig2)
    err = s.norm(s.ComplexField(grid, lhs.values - rhs.values))
    assert err <= 1e-8 * s.norm(rhs)


def test_predictor_endpoints(eig2, exp2):
    om, phi = s.predictor(exp2, eig2, 0.0)
    assert complex(om).real == pytest.approx(eig2.omega0)
    assert s.norm(phi) == 0.0
    # bifurcation-diagram endpoint: eps = (omega0 - 3.2)/|nu| lands at omega = 3.2
    eps = (eig2.omega0 - 3.2) / abs(exp2.nu.real)
    om, phi = s.predictor(exp2, eig2, eps)
    assert complex(om).real == pytest.approx(3.2, abs=1e-12)
    # ||phi_pred|| = sqrt(eps) (1 + O(eps)), checked in the small-eps regime
    for small in (1e-4, 1e-3):
        _, p = s.predictor(exp2, eig2, small)
        assert s.norm(p) == pytest.approx(np.sqrt(small), rel=50 * small)


def test_second_order_pt_and_orthogonality(eig2, exp2):
    sec = s.second_order_correction(eig2, exp2, 1e-3)
    assert abs(sec.sigma.imag) <= 1e-8 * max(1.0, abs(sec.sigma))
    assert abs(s.inner(sec.psi, eig2.phi0_star)) <= 1e-10
    assert pt_defect(sec.psi, 0.5) <= 1e-6
    assert sec.contraction_estimate < 1.0
    # fixed-point residuals of both equations at convergence
    assert sec.residual_sigma <= 1e-10 * max(1.0, abs(sec.sigma))
    assert sec.residual_psi <= 1e-10 * max(1.0, s.norm(sec.psi))


def test_second_order_matches_branch(eig2, exp2):
    eps = 1e-3
    sec = s.second_order_correction(eig2, exp2, eps)
    bp = s.solve_at_amplitude(eig2, exp2, eps)
    pred = eig2.omega0 + eps * exp2.nu.real + eps**2 * sec.sigma.real
    assert abs(bp.omega - pred) <= 1e-9


def test_second_order_tau_covariance(eig2):
    # the branch point is tau-independent: sigma rescales as eps^(1-tau)
    eps = 1e-3
    results = {}
    for tau in (0.5, 1.0):
        exp_t = s.expand(eig2, tau=tau)
        sec = s.second_order_correction(eig2, exp_t, eps)
        bp = s.solve_at_amplitude(eig2, exp_t, eps)
        pred = eig2.omega0 + eps * exp_t.nu.real + eps**(1 + tau) * sec.sigma.real
        assert abs(bp.omega - pred) <= 1e-9
        results[tau] = sec.sigma.real
    assert results[0.5] == pytest.approx(results[1.0] * eps**0.5, rel=1e-6)


def test_second_order_rejects_huge_epsilon(eig2, exp2):
    with pytest.raises(ExpansionError):
        s.second_order_correction(eig2, exp2, 10.0, max_iter=60)


def test_orthogonality_of_iterates_via_solver(eig2):
    solver = BorderedSolver(eig2)
    rng = np.random.default_rng(21)
    r = rng.standard_normal(eig2.grid.n) + 1j * rng.standard_normal(eig2.grid.n)
    phi, _ = solver.solve(r, 0.0)
    ip = eig2.grid.h * np.sum(phi * np.conj(eig2.phi0_star.values))
    assert abs(ip) <= 1e-10 * np.sqrt(eig2.grid.h) * np.linalg.norm(phi)


def test_tau_validation(eig2):
    with pytest.raises(ExpansionError):
        s.expand(eig2, tau=0.0)
    with pytest.raises(ExpansionError):
        s.expand(eig2, tau=1.5)
