"""PT-restricted Newton solver and natural-parameter branch continuation.

Solutions of F(phi; omega) = phi'' + W phi + Gamma |phi|^2 phi = 0 are
computed inside the PT-symmetric subspace {phi : conj(phi(2c - x)) = phi(x)}
about the stack center c.  On a mirror-symmetric grid that subspace is
parameterized by n real coordinates, which removes the global-phase null
direction of the Jacobian (only the sign ambiguity remains, fixed by
Re phi(center) > 0) and halves the linear systems.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import ComplexField, Grid, assemble_operator, gamma_on_grid, inner, norm
from .grid import potential_on_grid
from .materials import LayerStack
from .spectrum import EigenData
from .expansion import ExpansionData, SecondOrderData, predictor

__all__ = [
    "ContinuationError",
    "TrivialSolutionWarning",
    "BranchPoint",
    "Branch",
    "pt_reduce",
    "pt_expand",
    "pt_defect",
    "nonlinear_residual",
    "jacobian_apply",
    "newton_solve",
    "solve_at_amplitude",
    "continue_branch",
]


class ContinuationError(RuntimeError):
    pass


class TrivialSolutionWarning(UserWarning):
    pass


@dataclass
class BranchPoint:
    omega: float
    phi: ComplexField
    eps: float
    residual: float
    l2norm: float


@dataclass
class Branch:
    points: list
    case_label: str = ""
    grid: Grid | None = None

    def omegas(self):
        return np.array([p.omega for p in self.points])

    def norms(self):
        return np.array([p.l2norm for p in self.points])


def _check_grid(grid: Grid, center: float):
    if not grid.is_mirror_symmetric():
        raise ContinuationError("grid has an even node count; no center node")
    if abs(grid.center - center) > 0.5 * grid.h:
        raise ContinuationError(
            f"grid center {grid.center} does not match the PT center {center}"
        )


def pt_reduce(phi: ComplexField, center: float) -> np.ndarray:
    """Real coordinates of the PT part of a field.

    Layout: [Re phi(c), Re phi(c+h), Im phi(c+h), Re phi(c+2h), ...].
    Applied to a PT-symmetric field this is a bijection; otherwise it
    returns the coordinates of (phi + B phi)/2.
    """
    grid = phi.grid
    _check_grid(grid, center)
    n = grid.n
    c = grid.center_index
    v = phi.values
    u = np.empty(n)
    u[0] = v[c].real
    right = v[c + 1:]
    left = np.conj(v[:c][::-1])
    sym = 0.5 * (right + left)
    u[1::2] = sym.real
    u[2::2] = sym.imag
    return u


def pt_expand(u: np.ndarray, grid: Grid) -> ComplexField:
    """Inverse of pt_reduce onto the PT-symmetric subspace."""
    n = grid.n
    if u.shape != (n,):
        raise ValueError("coordinate vector length mismatch")
    c = grid.center_index
    v = np.empty(n, dtype=complex)
    v[c] = u[0]
    right = u[1::2] + 1j * u[2::2]
    v[c + 1:] = right
    v[:c] = np.conj(right[::-1])
    return ComplexField(grid, v)


def pt_defect(phi: ComplexField, center: float) -> float:
    """|| (phi - B phi)/2 ||_h / ||phi||_h, B = reflection + conjugation."""
    grid = phi.grid
    _check_grid(grid, center)
    b = np.conj(phi.values[::-1])
    half = 0.5 * (phi.values - b)
    s = norm(phi)
    return math.sqrt(grid.h) * float(np.linalg.norm(half)) / max(s, 1e-300)


def nonlinear_residual(
    phi: ComplexField, omega: float, stack: LayerStack, grid: Grid,
    scheme: str = "interface4",
) -> ComplexField:
    """F(phi) = phi'' + W phi + Gamma |phi|^2 phi on the grid."""
    L = assemble_operator(grid, stack, omega, scheme=scheme)
    g = gamma_on_grid(grid, stack, omega)
    v = phi.values
    return ComplexField(grid, -L.matvec(v) + g * np.abs(v) ** 2 * v)


def jacobian_apply(
    phi: ComplexField, omega: float, stack: LayerStack, grid: Grid,
    dphi: ComplexField, scheme: str = "interface4",
) -> ComplexField:
    """Directional derivative of F at phi: real-linear in dphi.

    J(dphi) = dphi'' + W dphi + Gamma (2|phi|^2 dphi + phi^2 conj(dphi)).
    """
    L = assemble_operator(grid, stack, omega, scheme=scheme)
    g = gamma_on_grid(grid, stack, omega)
    v = phi.values
    w = dphi.values
    out = -L.matvec(w) + g * (2 * np.abs(v) ** 2 * w + v**2 * np.conj(w))
    return ComplexField(grid, out)


def _reduction_matrices(grid: Grid):
    """Sparse expand S: R^n -> R^2n and row-selector R: R^2n -> R^n.

    The 2n real representation stacks [Re phi; Im phi].
    """
    n = grid.n
    c = grid.center_index
    half = (n - 1) // 2
    rows, cols, vals = [], [], []
    # center node: Re = u[0], Im = 0
    rows.append(c); cols.append(0); vals.append(1.0)
    for t in range(1, half + 1):
        ur, ui = 2 * t - 1, 2 * t
        # right node c+t
        rows.append(c + t); cols.append(ur); vals.append(1.0)
        rows.append(n + c + t); cols.append(ui); vals.append(1.0)
        # mirror node c-t: conj
        rows.append(c - t); cols.append(ur); vals.append(1.0)
        rows.append(n + c - t); cols.append(ui); vals.append(-1.0)
    S = sp.csr_matrix((vals, (rows, cols)), shape=(2 * n, n))
    rows, cols, vals = [], [], []
    rows.append(0); cols.append(c); vals.append(1.0)
    for t in range(1, half + 1):
        rows.append(2 * t - 1); cols.append(c + t); vals.append(1.0)
        rows.append(2 * t); cols.append(n + c + t); vals.append(1.0)
    R = sp.csr_matrix((vals, (rows, cols)), shape=(n, 2 * n))
    return S, R


class _PTNewtonWorkspace:
    """Caches the omega-independent reduction matrices and the L matrix."""

    def __init__(self, stack: LayerStack, grid: Grid, scheme: str):
        self.stack = stack
        self.grid = grid
        self.scheme = scheme
        self.S, self.R = _reduction_matrices(grid)
        self._omega = None
        self._Lsp = None
        self._g = None

    def set_omega(self, omega: float):
        if self._omega == omega:
            return
        L = assemble_operator(self.grid, self.stack, omega, scheme=self.scheme)
        self._Lsp = L.as_sparse()
        self._L = L
        self._g = gamma_on_grid(self.grid, self.stack, omega)
        self._omega = omega

    def residual(self, v: np.ndarray) -> np.ndarray:
        return -self._L.matvec(v) + self._g * np.abs(v) ** 2 * v

    def reduced_jacobian(self, v: np.ndarray) -> sp.csr_matrix:
        n = self.grid.n
        A = -self._Lsp + sp.diags(2 * self._g * np.abs(v) ** 2)
        C = sp.diags(self._g * v**2)
        AR, AI = A.real, A.imag
        CR, CI = C.real, C.imag
        J2 = sp.bmat([[AR + CR, -AI + CI], [AI + CI, AR - CR]], format="csr")
        return (self.R @ J2 @ self.S).tocsc()

    def reduced_residual(self, v: np.ndarray) -> np.ndarray:
        F = self.residual(v)
        z = np.concatenate([F.real, F.imag])
        return self.R @ z


def _measure_eps(phi: ComplexField, eig: EigenData | None):
    if eig is None:
        return math.nan
    ip = inner(phi, eig.phi0_star)
    return float(ip.real) ** 2


def newton_solve(
    phi_init: ComplexField,
    omega: float,
    stack: LayerStack,
    grid: Grid,
    tol: float = 1e-10,
    max_iter: int = 40,
    eig: EigenData | None = None,
    scheme: str = "interface4",
    workspace: _PTNewtonWorkspace | None = None,
) -> BranchPoint:
    """Damped Newton iteration in PT-reduced coordinates at fixed omega."""
    if tol < 1e-13:
        raise ValueError("tolerance below attainable rounding level")
    ws = workspace or _PTNewtonWorkspace(stack, grid, scheme)
    ws.set_omega(omega)
    center = stack.center
    u = pt_reduce(phi_init, center)
    v = pt_expand(u, grid).values
    sqh = math.sqrt(grid.h)
    res = sqh * np.linalg.norm(ws.residual(v))
    converged = False
    for it in range(max_iter + 1):
        scale = max(1.0, sqh * float(np.linalg.norm(v)))
        if res <= tol * scale:
            converged = True
            break
        if it == max_iter:
            break
        J = ws.reduced_jacobian(v)
        rhs = -ws.reduced_residual(v)
        du = spla.splu(J).solve(rhs)
        step = 1.0
        for _ in range(7):
            u_try = u + step * du
            v_try = pt_expand(u_try, grid).values
            res_try = sqh * np.linalg.norm(ws.residual(v_try))
            if res_try < res:
                break
            step *= 0.5
        else:
            raise ContinuationError(
                f"line search stalled at omega={omega}, residual {res:.2e}"
            )
        u, v, res = u_try, v_try, res_try
    if not converged:
        raise ContinuationError(
            f"Newton did not reach tol={tol} at omega={omega} "
            f"(residual {res:.2e} after {max_iter} iterations)"
        )
    # sign gauge: the PT reduction leaves a phi -> -phi ambiguity
    if v[grid.center_index].real < 0:
        v = -v
    phi = ComplexField(grid, v)
    nrm = norm(phi)
    if nrm < 1e-8:
        warnings.warn(
            f"Newton converged to the trivial solution at omega={omega}",
            TrivialSolutionWarning,
        )
    return BranchPoint(
        omega=omega, phi=phi, eps=_measure_eps(phi, eig),
        residual=res, l2norm=nrm,
    )


def solve_at_amplitude(
    eig: EigenData,
    exp_data: ExpansionData,
    eps: float,
    second: SecondOrderData | None = None,
    tol: float = 1e-12,
    max_iter: int = 60,
    scheme: str | None = None,
) -> BranchPoint:
    """Branch point at prescribed amplitude <phi, phi0*> = eps^(1/2).

    Newton on the bordered PT-reduced system with (phi, omega) unknown;
    seeded by the truncated expansion.  Used to compare the branch against
    the predictor at matched epsilon.
    """
    scheme = scheme or eig.scheme
    grid = eig.grid
    stack = eig.stack
    ws = _PTNewtonWorkspace(stack, grid, scheme)
    omega, phi = predictor(exp_data, eig, eps, second)
    omega = complex(omega).real
    u = pt_reduce(phi, stack.center)
    sq_eps = math.sqrt(eps)
    sqh = math.sqrt(grid.h)
    # constraint row: Re<phi(u), phi0*> as a linear functional of u
    star = eig.phi0_star.values
    zrow = grid.h * np.concatenate([np.conj(star).real, -np.conj(star).imag])
    crow = (ws.S.T @ zrow)   # d Re<phi,phi0*> / du
    n = grid.n
    converged = False
    for it in range(max_iter + 1):
        ws.set_omega(omega)
        v = pt_expand(u, grid).values
        F = ws.reduced_residual(v)
        cval = grid.h * float(np.sum((v * np.conj(star)).real)) - sq_eps
        res = sqh * np.linalg.norm(F) + abs(cval)
        if res <= tol * max(1.0, sqh * float(np.linalg.norm(v))):
            converged = True
            break
        if it == max_iter:
            break
        J = ws.reduced_jacobian(v)
        dW = potential_on_grid(grid, stack, omega, order=1)
        # d Gamma/d omega = 2 Gamma / omega for Gamma = 3 omega^2 chi3
        g = gamma_on_grid(grid, stack, omega)
        dF_dom = dW * v + (2.0 / omega) * g * np.abs(v) ** 2 * v
        dcol = ws.R @ np.concatenate([dF_dom.real, dF_dom.imag])
        M = sp.bmat(
            [[J, dcol.reshape(-1, 1)], [crow.reshape(1, -1), None]], format="csc"
        )
        # bottom-right block is zero
        sol = spla.splu(M).solve(-np.concatenate([F, [cval]]))
        u = u + sol[:n]
        omega = omega + float(sol[n].real)
    if not converged:
        raise ContinuationError(
            f"amplitude-constrained Newton stalled at eps={eps} (res {res:.2e})"
        )
    phi = pt_expand(u, grid)
    return BranchPoint(
        omega=float(omega), phi=phi, eps=_measure_eps(phi, eig),
        residual=sqh * float(np.linalg.norm(ws.residual(phi.values))),
        l2norm=norm(phi),
    )


def continue_branch(
    eig: EigenData,
    exp_data: ExpansionData,
    stack: LayerStack,
    grid: Grid,
    omega_end: float,
    steps: int = 64,
    tol: float = 1e-10,
    case_label: str = "",
    scheme: str | None = None,
) -> Branch:
    """Natural continuation in omega from omega0 toward omega_end.

    The first point is seeded by the predictor at eps = (omega-omega0)/nu;
    later points reuse the previous solution.  A failed Newton step is
    retried on a bisected omega-step up to 5 times, after which the
    partial branch is returned with a warning.
    """
    scheme = scheme or eig.scheme
    nu = exp_data.nu.real
    if nu == 0:
        raise ContinuationError("nu = 0: no branch direction")
    if (omega_end - eig.omega0) / nu <= 0:
        raise ContinuationError(
            "omega_end lies on the wrong side of omega0 for this branch "
            f"(nu = {nu:.4g})"
        )
    ws = _PTNewtonWorkspace(stack, grid, scheme)
    pts = []
    targets = list(np.linspace(eig.omega0, omega_end, steps + 1)[1:])
    prev_phi = None
    om_prev = eig.omega0
    aborted = False
    for target in targets:
        # pending stack: intermediate bisection points below the target
        pending = [float(target)]
        while pending:
            om = pending[-1]
            if prev_phi is None:
                eps_seed = (om - eig.omega0) / nu
                _, seed = predictor(exp_data, eig, eps_seed)
            else:
                seed = prev_phi
            try:
                bp = newton_solve(
                    seed, om, stack, grid, tol=tol, eig=eig,
                    scheme=scheme, workspace=ws,
                )
            except ContinuationError:
                if len(pending) > 5:
                    aborted = True
                    break
                pending.append(0.5 * (om_prev + om))
                continue
            if bp.l2norm < 1e-8:
                raise ContinuationError(
                    "continuation collapsed onto the trivial solution; "
                    "no nontrivial branch (is the nonlinearity zero?)"
                )
            pts.append(bp)
            prev_phi = bp.phi
            om_prev = bp.omega
            pending.pop()
        if aborted:
            warnings.warn(
                f"continuation aborted near omega={target}; "
                "returning partial branch",
                RuntimeWarning,
            )
            break
    return Branch(points=pts, case_label=case_label, grid=grid)
