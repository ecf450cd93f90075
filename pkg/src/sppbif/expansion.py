"""Bifurcation expansion of the nonlinear eigenvalue problem.

Near the linear eigenpair (omega0, phi0) the branch of solutions of

    phi'' + W(x, omega) phi + Gamma(x, omega) |phi|^2 phi = 0

with the amplitude constraint <phi, phi0*> = eps^(1/2) has the form

    omega = omega0 + eps nu + eps^(1+tau) sigma
    phi   = eps^(1/2) phi0 + eps^(3/2) phi_c + eps^(3/2+tau) psi

(cubic nonlinearity: amplitude exponent 1/2).  nu is explicit, phi_c
solves one bordered linear system, and (sigma, psi) solve a small coupled
fixed-point system obtained by projecting the equation onto the kernel
direction and its complement.

All frequency derivatives of the linear part enter through the exact
matrix derivatives of the assembled operator family L(omega), so every
reduction identity holds at rounding level for the discrete problem, not
just in the continuum limit.  In operator form the dictionary is
dW/domega * u -> -L'(omega0) u and the quadratic Taylor remainder
I(., omega) u -> -[L(omega) - L(omega0) - d L' - d^2/2 L''] u, which is
evaluated by assembling L at the shifted frequency (the closed-form
potentials make this exact).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import (
    ComplexField,
    assemble_operator,
    assemble_operator_domega,
    gamma_on_grid,
    inner,
    potential_remainder_on_grid,
)
from .spectrum import EigenData

__all__ = [
    "ExpansionError",
    "ExpansionData",
    "SecondOrderData",
    "BorderedSolver",
    "first_order_coefficient",
    "first_order_correction",
    "expand",
    "predictor",
    "second_order_correction",
]

ALPHA = 0.5   # amplitude exponent of the cubic branch


class ExpansionError(RuntimeError):
    pass


@dataclass
class ExpansionData:
    nu: complex
    phi_corr: ComplexField
    alpha: float = ALPHA
    tau: float = 1.0
    solvability_defect: float = 0.0


@dataclass
class SecondOrderData:
    sigma: complex
    psi: ComplexField
    iterations: int
    contraction_estimate: float
    residual_sigma: float = 0.0   # |S(sigma) - sigma| at convergence
    residual_psi: float = 0.0     # ||G(sigma, psi) - psi||_h at convergence


class BorderedSolver:
    """Solves L(omega0) phi + zeta phi0 = r with <phi, phi0*> = s.

    The bordered matrix is factorized once; the border makes the solve
    well posed although L(omega0) is numerically singular on the kernel.
    """

    def __init__(self, eig: EigenData):
        grid = eig.grid
        L = assemble_operator(grid, eig.stack, eig.omega0, scheme=eig.scheme)
        n, h = grid.n, grid.h
        A = L.as_sparse().tolil()
        col = eig.phi0.values
        row = h * np.conj(eig.phi0_star.values)
        M = sp.lil_matrix((n + 1, n + 1), dtype=complex)
        M[:n, :n] = A
        M[:n, n] = col.reshape(-1, 1)
        M[n, :n] = row
        self._lu = spla.splu(M.tocsc())
        self._n = n
        self._grid = grid

    def solve(self, r: np.ndarray, s: complex = 0.0):
        rhs = np.concatenate([r, [s]])
        sol = self._lu.solve(rhs)
        return sol[: self._n], sol[self._n]


def first_order_coefficient(eig: EigenData) -> complex:
    """nu = -<Gamma |phi0|^2 phi0, phi0*> / <dW phi0, phi0*>."""
    if eig.transversality == 0:
        raise ExpansionError("zero transversality")
    grid = eig.grid
    g = gamma_on_grid(grid, eig.stack, eig.omega0)
    v = eig.phi0.values
    num = grid.h * np.sum(g * np.abs(v) ** 2 * v * np.conj(eig.phi0_star.values))
    return -num / eig.transversality


def first_order_correction(eig: EigenData, nu: complex, solver: BorderedSolver | None = None):
    """Field correction: L(omega0) phi_c = Gamma|phi0|^2 phi0 - nu L'(omega0) phi0
    on <phi0*>^perp.

    By construction of nu the right-hand side is orthogonal to phi0*, and
    the bordered multiplier zeta reports the residual solvability defect.
    """
    grid = eig.grid
    if solver is None:
        solver = BorderedSolver(eig)
    g = gamma_on_grid(grid, eig.stack, eig.omega0)
    D1 = assemble_operator_domega(grid, eig.stack, eig.omega0, order=1,
                                  scheme=eig.scheme)
    v = eig.phi0.values
    r = g * np.abs(v) ** 2 * v - nu * D1.matvec(v)
    phi, zeta = solver.solve(r, 0.0)
    rn = math.sqrt(grid.h) * np.linalg.norm(r)
    return ComplexField(grid, phi), abs(zeta) / max(rn, 1e-300)


def expand(eig: EigenData, tau: float = 1.0) -> ExpansionData:
    """First-order expansion data (nu and the field correction)."""
    if not 0.0 < tau <= 1.0:
        raise ExpansionError("tau must lie in (0, 1]")
    nu = first_order_coefficient(eig)
    solver = BorderedSolver(eig)
    phi_c, defect = first_order_correction(eig, nu, solver)
    return ExpansionData(nu=nu, phi_corr=phi_c, tau=tau, solvability_defect=defect)


def predictor(
    exp_data: ExpansionData,
    eig: EigenData,
    epsilon: float,
    second: SecondOrderData | None = None,
):
    """Truncated branch point (omega_pred, phi_pred) at amplitude epsilon."""
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    a = ALPHA
    omega = eig.omega0 + epsilon * exp_data.nu
    vals = (
        epsilon**a * eig.phi0.values
        + epsilon ** (a + 1) * exp_data.phi_corr.values
    )
    if second is not None:
        t = exp_data.tau
        omega = omega + epsilon ** (1 + t) * second.sigma
        vals = vals + epsilon ** (a + 1 + t) * second.psi.values
    return omega, ComplexField(eig.grid, vals)


def second_order_correction(
    eig: EigenData,
    exp_data: ExpansionData,
    epsilon: float,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> SecondOrderData:
    """Solve the coupled (sigma, psi) system by the nested fixed point.

    Inner loop: psi <- [Q0 L(omega0) Q0]^{-1} R(sigma, psi) / eps^(a+1+tau);
    outer loop: sigma <- S(sigma).  Diverging iterations (contraction
    estimate >= 1) raise, suggesting a smaller epsilon.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    grid = eig.grid
    stack = eig.stack
    scheme = eig.scheme
    h = grid.h
    a = ALPHA
    tau = exp_data.tau
    nu = exp_data.nu
    om0 = eig.omega0
    T = eig.transversality
    phi0 = eig.phi0.values
    phic = exp_data.phi_corr.values
    star = np.conj(eig.phi0_star.values)
    solver = BorderedSolver(eig)

    D1 = assemble_operator_domega(grid, stack, om0, order=1, scheme=scheme)
    D2 = assemble_operator_domega(grid, stack, om0, order=2, scheme=scheme)
    g0 = gamma_on_grid(grid, stack, om0)
    chi3_over = g0 / (3 * om0**2)   # per-node chi3 samples
    D1_phi0 = D1.matvec(phi0)
    D1_phic = D1.matvec(phic)
    D2_phi0 = D2.matvec(phi0)
    D2_phic = D2.matvec(phic)

    def pair(u):
        return h * np.sum(u * star)

    def assemble_R(sigma, psi):
        """R(sigma, psi) and the kernel projection defining the sigma map.

        Every term is evaluated cancellation-free: the nonlinearity
        difference is expanded trilinearly around eps^a phi0, the
        Gamma(omega)-Gamma(omega0) factor uses domega(omega+omega0)
        directly, and the quadratic Taylor remainder of W comes from the
        closed-form layer remainders (exactly zero for polynomial layers).
        """
        psi_scale = math.sqrt(h) * np.linalg.norm(psi)
        if not (np.isfinite(sigma) and abs(sigma) < 1e8
                and np.isfinite(psi_scale) and psi_scale < 1e8):
            raise ExpansionError(
                "fixed point diverged (iterate overflow); epsilon too large"
            )
        domega = epsilon * nu + epsilon ** (1 + tau) * sigma
        omega = om0 + domega
        # f(omega, phi) - eps^(a+1) Gamma0 |phi0|^2 phi0, expanded exactly:
        aa = epsilon**a * phi0
        dd = epsilon ** (a + 1) * (phic + epsilon**tau * psi)
        phi = aa + dd
        cube_diff = (
            2 * np.abs(aa) ** 2 * dd + aa**2 * np.conj(dd)
            + 2 * aa * np.abs(dd) ** 2 + np.conj(aa) * dd**2
            + np.abs(dd) ** 2 * dd
        )
        dg = 3 * chi3_over * domega * (omega + om0)   # Gamma(omega)-Gamma(omega0)
        f_lead = dg * np.abs(phi) ** 2 * phi + g0 * cube_diff
        tail = phi0 + epsilon * phic + epsilon ** (1 + tau) * psi
        D1_psi = D1.matvec(psi)
        D2_psi = D2.matvec(psi)
        Wrem = potential_remainder_on_grid(grid, stack, om0, domega)
        v = (
            -epsilon ** (a + 2 + tau) * sigma * D1_phic
            - epsilon ** (a + 2 + tau) * (nu + epsilon**tau * sigma) * D1_psi
            - epsilon ** (a + 3) * (nu**2 / 2) * (D2_phic + epsilon**tau * D2_psi)
            - epsilon ** (a + 2 + tau)
            * 0.5
            * (2 * nu * sigma + epsilon**tau * sigma**2)
            * (D2_phi0 + epsilon * D2_phic + epsilon ** (1 + tau) * D2_psi)
            + epsilon**a * Wrem * tail
        )
        r3 = -(nu**2 / 2) * D2_phi0 - nu * D1_phic
        R = (
            f_lead
            - epsilon ** (a + 1 + tau) * sigma * D1_phi0
            + epsilon ** (a + 2) * r3
            + v
        )
        sigma_next = (
            -(epsilon ** (a + 2)) * pair(r3) - pair(v) - pair(f_lead)
        ) / (epsilon ** (a + 1 + tau) * T)
        return R, sigma_next

    sigma = 0.0 + 0.0j
    psi = np.zeros(grid.n, dtype=complex)
    total_iters = 0
    contraction = 0.0
    prev_outer = None
    for _outer in range(max_iter):
        prev_inner = None
        for _inner in range(max_iter):
            R, _ = assemble_R(sigma, psi)
            Rq = R - pair(R) * phi0   # Q0 R
            sol, _ = solver.solve(Rq, 0.0)
            psi_new = sol / epsilon ** (a + 1 + tau)
            if not np.all(np.isfinite(psi_new)):
                raise ExpansionError(
                    "fixed point diverged (psi overflow); epsilon too large"
                )
            # the eps^-(a+1+tau) scaling amplifies the bordered solve's
            # constraint error; restore orthogonality explicitly
            psi_new = psi_new - pair(psi_new) * phi0
            step = math.sqrt(h) * np.linalg.norm(psi_new - psi)
            total_iters += 1
            if prev_inner is not None and prev_inner > 10 * tol:
                contraction = max(contraction, min(step / prev_inner, 10.0))
            prev_inner = step
            psi = psi_new
            if step <= tol * max(1.0, math.sqrt(h) * np.linalg.norm(psi)):
                break
        else:
            raise ExpansionError("inner psi iteration did not converge")
        _, sigma_new = assemble_R(sigma, psi)
        dsig = abs(sigma_new - sigma)
        if prev_outer is not None and prev_outer > 10 * tol:
            contraction = max(contraction, min(dsig / prev_outer, 10.0))
        prev_outer = dsig
        sigma = sigma_new
        if dsig <= tol * max(1.0, abs(sigma)):
            break
    else:
        raise ExpansionError(
            f"sigma iteration did not converge (contraction ~ {contraction:.2f}); "
            "try a smaller epsilon"
        )
    if contraction >= 1.0:
        raise ExpansionError(
            f"fixed point not contracting (estimate {contraction:.2f}); "
            "epsilon too large"
        )
    # measured residuals of both fixed-point equations at the solution
    R, sigma_chk = assemble_R(sigma, psi)
    Rq = R - pair(R) * phi0
    sol, _ = solver.solve(Rq, 0.0)
    psi_chk = sol / epsilon ** (a + 1 + tau)
    psi_chk = psi_chk - pair(psi_chk) * phi0
    return SecondOrderData(
        sigma=sigma,
        psi=ComplexField(grid, psi),
        iterations=total_iters,
        contraction_estimate=contraction,
        residual_sigma=abs(sigma_chk - sigma),
        residual_psi=math.sqrt(h) * float(np.linalg.norm(psi_chk - psi)),
    )
