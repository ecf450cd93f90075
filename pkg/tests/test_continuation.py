import numpy as np
import pytest

import sppbif as s
from sppbif.continuation import (
    ContinuationError,
    TrivialSolutionWarning,
    pt_defect,
)

from conftest import case2_stack, grid_builder


def test_pt_reduce_expand_roundtrip(eig2):
    g = eig2.grid
    u = s.pt_reduce(eig2.phi0, 0.5)
    back = s.pt_expand(u, g)
    assert np.max(np.abs(back.values - eig2.phi0.values)) <= 1e-14


def test_pt_reduce_real_even_field(eig2):
    g = eig2.grid
    vals = np.exp(-((g.x - g.center) ** 2))
    vals = 0.5 * (vals + vals[::-1])   # exactly even in floating point
    f = s.ComplexField(g, vals.astype(complex))
    u = s.pt_reduce(f, g.center)
    back = s.pt_expand(u, g)
    assert np.max(np.abs(back.values - f.values)) <= 1e-15


def test_pt_reduce_projects_to_pt_part(eig2):
    g = eig2.grid
    rng = np.random.default_rng(2)
    f = s.ComplexField(g, rng.standard_normal(g.n) + 1j * rng.standard_normal(g.n))
    part = s.pt_expand(s.pt_reduce(f, g.center), g)
    b = np.conj(f.values[::-1])
    sym = 0.5 * (f.values + b)
    assert np.max(np.abs(part.values - sym)) <= 1e-14
    defect = s.norm(s.ComplexField(g, 0.5 * (f.values - b)))
    assert pt_defect(f, g.center) == pytest.approx(defect / s.norm(f), rel=1e-10)


def test_residual_zero_field(eig2):
    g = eig2.grid
    z = s.ComplexField(g, np.zeros(g.n, dtype=complex))
    assert s.norm(s.nonlinear_residual(z, 3.5, eig2.stack, g)) == 0.0


def test_residual_linear_limit():
    # with chi3 = 0 the eigenfunction solves the nonlinear problem too
    st = case2_stack(chi3=0.0)
    eig = s.solve_eigenpair(st, grid_builder(512), 3.83, (3.7, 3.95))
    F = s.nonlinear_residual(eig.phi0, eig.omega0, st, eig.grid)
    assert s.norm(F) <= 1e-8


def test_residual_gauge_covariance(eig2, exp2):
    _, phi = s.predictor(exp2, eig2, 1e-2)
    g = eig2.grid
    F1 = s.norm(s.nonlinear_residual(phi, 3.8, eig2.stack, g))
    rot = s.ComplexField(g, np.exp(0.7j) * phi.values)
    F2 = s.norm(s.nonlinear_residual(rot, 3.8, eig2.stack, g))
    assert F1 == pytest.approx(F2, rel=1e-12)


def test_jacobian_vs_central_difference(eig2, exp2):
    g = eig2.grid
    om, phi = s.predictor(exp2, eig2, 1e-2)
    om = complex(om).real
    rng = np.random.default_rng(4)
    d = rng.standard_normal(g.n) + 1j * rng.standard_normal(g.n)
    d /= np.sqrt(g.h) * np.linalg.norm(d)
    dphi = s.ComplexField(g, d)
    h = 1e-6
    Fp = s.nonlinear_residual(s.ComplexField(g, phi.values + h * d), om, eig2.stack, g)
    Fm = s.nonlinear_residual(s.ComplexField(g, phi.values - h * d), om, eig2.stack, g)
    J = s.jacobian_apply(phi, om, eig2.stack, g, dphi)
    fd = (Fp.values - Fm.values) / (2 * h)
    assert np.sqrt(g.h) * np.linalg.norm(fd - J.values) <= 1e-6


def test_jacobian_is_only_real_linear(eig2, exp2):
    g = eig2.grid
    om, phi = s.predictor(exp2, eig2, 1e-2)
    om = complex(om).real
    rng = np.random.default_rng(6)
    d = rng.standard_normal(g.n) + 1j * rng.standard_normal(g.n)
    dphi = s.ComplexField(g, d)
    J1 = s.jacobian_apply(phi, om, eig2.stack, g, dphi)
    J2 = s.jacobian_apply(phi, om, eig2.stack, g, s.ComplexField(g, 1j * d))
    diff = s.ComplexField(g, J2.values - 1j * J1.values)
    # the complex-linearity defect is exactly the conjugate-coupling term
    from sppbif.grid import gamma_on_grid
    gam = gamma_on_grid(g, eig2.stack, om)
    expect = s.ComplexField(g, -2j * gam * phi.values**2 * np.conj(d))
    assert s.norm(diff) > 0
    assert s.norm(s.ComplexField(g, diff.values - expect.values)) \
        <= 1e-10 * s.norm(expect)


def test_newton_trivial_warning(eig2):
    g = eig2.grid
    zero = s.ComplexField(g, np.zeros(g.n, dtype=complex))
    with pytest.warns(TrivialSolutionWarning):
        bp = s.newton_solve(zero, 3.5, eig2.stack, g, eig=eig2)
    assert bp.l2norm <= 1e-12


def test_newton_converges_from_predictor(eig2, exp2):
    om = eig2.omega0 - 1e-3 * abs(exp2.nu.real)
    eps = (om - eig2.omega0) / exp2.nu.real
    _, seed = s.predictor(exp2, eig2, eps)
    bp = s.newton_solve(seed, om, eig2.stack, eig2.grid, eig=eig2, max_iter=8)
    assert bp.residual <= 1e-10
    assert abs(s.inner(bp.phi, eig2.phi0_star).imag) <= 1e-8


def test_newton_scaling_consistency(eig2, exp2):
    nu = exp2.nu.real
    oms = [eig2.omega0 + eps * nu for eps in (2e-3, 4e-3)]
    bps = []
    for om in oms:
        eps = (om - eig2.omega0) / nu
        _, seed = s.predictor(exp2, eig2, eps)
        bps.append(s.newton_solve(seed, om, eig2.stack, eig2.grid, eig=eig2))
    ratio = bps[1].l2norm / bps[0].l2norm
    assert ratio == pytest.approx(np.sqrt(2.0), rel=0.02)


def test_branch_case2_short(eig2, exp2):
    br = s.continue_branch(eig2, exp2, eig2.stack, eig2.grid,
                           eig2.omega0 - 0.1, steps=10)
    assert len(br.points) == 10
    oms = br.omegas()
    assert np.all(np.diff(oms) < 0)
    for p in br.points:
        assert p.residual <= 1e-10 * max(1.0, p.l2norm)
        assert pt_defect(p.phi, 0.5) <= 1e-6
        assert p.eps > 0
        ip = s.inner(p.phi, eig2.phi0_star)
        assert abs(ip.imag) <= 1e-8
    eps_seq = [p.eps for p in br.points]
    assert np.all(np.diff(eps_seq) > 0)


def test_branch_requires_correct_direction(eig2, exp2):
    with pytest.raises(ContinuationError):
        s.continue_branch(eig2, exp2, eig2.stack, eig2.grid,
                          eig2.omega0 + 0.5, steps=8)


def test_branch_refuses_linear_problem():
    st = case2_stack(chi3=0.0)
    eig = s.solve_eigenpair(st, grid_builder(512), 3.83, (3.7, 3.95))
    exp = s.expand(eig)
    # nu = 0: no branch direction at all
    with pytest.raises(ContinuationError):
        s.continue_branch(eig, exp, st, eig.grid, eig.omega0 - 0.3, steps=4)


def test_solve_at_amplitude_constraint(eig2, exp2):
    eps = 5e-3
    bp = s.solve_at_amplitude(eig2, exp2, eps)
    ip = s.inner(bp.phi, eig2.phi0_star)
    assert ip.real == pytest.approx(np.sqrt(eps), abs=1e-10)
    assert abs(ip.imag) <= 1e-10
    assert bp.residual <= 1e-9
