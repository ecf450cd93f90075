"""Discrete linear eigenpair of the layered wave operator.

Finds the real frequency omega0 at which L(omega) = -(d^2/dx^2 + W) is
singular, together with the kernel vector phi0, the adjoint kernel vector
phi0_star, the transversality scalar <dW/domega phi0, phi0*> and the
spectral gap.  Normalizations: ||phi0|| = 1, <phi0, phi0*> = 1, and the
phase gauge Re phi0(center) > 0, Im phi0(center) = 0, which makes PT
symmetry of phi0 literal for PT stacks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from .grid import (
    BandedOperator,
    ComplexField,
    Grid,
    assemble_operator,
    assemble_operator_domega,
    inner,
    norm,
)
from .materials import LayerStack

__all__ = [
    "SpectrumError",
    "EigenData",
    "smallest_eigenpair",
    "solve_eigenpair",
    "mode_projection",
    "complement_projection",
    "adjoint_conjugation_defect",
]

_SEED = 0x5EED


class SpectrumError(RuntimeError):
    pass


@dataclass
class EigenData:
    """Linear eigenpair with the reduction normalizations."""

    omega0: float
    phi0: ComplexField
    phi0_star: ComplexField
    transversality: complex
    gap: float
    stack: LayerStack
    scheme: str = "interface4"

    @property
    def grid(self) -> Grid:
        return self.phi0.grid


def _start_vector(n: int) -> np.ndarray:
    rng = np.random.default_rng(_SEED)
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def smallest_eigenpair(
    L: BandedOperator,
    max_iter: int = 200,
    tol: float = 1e-12,
):
    """Eigenvalue of L of smallest modulus and its eigenvector.

    Inverse (shift-invert at 0) power iteration with a banded LU solve; if
    the factorization is exactly singular a tiny diagonal shift is
    retried.  Returns (mu, vec, residual).
    """
    n, h = L.n, L.h
    # stagnation acceptance: the attainable residual floor scales with the
    # rounding error of applying L (physics grids sit far below 1e-10)
    op_scale = float(np.max(np.abs(L.data))) * (L.l + L.u + 1)
    accept = max(1e-10, 25 * np.finfo(float).eps * op_scale)
    shift = 0.0
    for attempt in range(4):
        ab = L.data.copy()
        if shift:
            ab[L.u, :] += shift
        try:
            v = _start_vector(n)
            v /= math.sqrt(h) * np.linalg.norm(v)
            res_best = math.inf
            stalled = 0
            for it in range(max_iter):
                w = solve_banded((L.l, L.u), ab, v)
                if not np.all(np.isfinite(w)):
                    raise np.linalg.LinAlgError("singular banded solve")
                w /= math.sqrt(h) * np.linalg.norm(w)
                Lw = L.matvec(w)
                mu_new = np.sum(Lw * np.conj(w)) / np.sum(w * np.conj(w))
                res = math.sqrt(h) * np.linalg.norm(Lw - mu_new * w)
                v = w
                if res <= tol * max(1.0, abs(mu_new)):
                    return mu_new, v, res
                # rounding floor: residual stops improving at eps * ||L||
                stalled = stalled + 1 if res > 0.9 * res_best else 0
                res_best = min(res_best, res)
                if stalled >= 4:
                    if res <= accept:
                        return mu_new, v, res
                    raise SpectrumError(
                        f"inverse iteration stagnated at residual {res:.2e}"
                    )
            raise SpectrumError(
                f"inverse iteration did not converge in {max_iter} steps "
                f"(last residual {res:.2e})"
            )
        except np.linalg.LinAlgError:
            scale = float(np.max(np.abs(L.data[L.u, :])))
            shift = (10.0 ** (-12 + 2 * attempt)) * max(scale, 1.0)
    raise SpectrumError("banded factorization failed for every shift")


def _second_smallest_eigenvalue(L: BandedOperator) -> float:
    """|mu_2|: modulus of the next-nearest eigenvalue to 0 (Arnoldi)."""
    A = L.as_sparse().tocsc()
    v0 = np.real(_start_vector(L.n))
    try:
        vals = spla.eigs(
            A, k=2, sigma=0.0, which="LM", v0=v0,
            return_eigenvectors=False, tol=1e-10, maxiter=2000,
        )
    except spla.ArpackError as exc:   # pragma: no cover - ARPACK hiccup
        raise SpectrumError(f"Arnoldi gap estimate failed: {exc}") from None
    vals = sorted(vals, key=abs)
    return float(abs(vals[1]))


def solve_eigenpair(
    stack: LayerStack,
    grid_builder,
    omega_guess: float,
    bracket,
    scheme: str = "interface4",
    omega_tol: float = 1e-12,
) -> EigenData:
    """Root-find the singular frequency of L(omega) and build EigenData.

    grid_builder(stack, omega) -> Grid; the grid is built once at
    omega_guess and reused across the root search, so the discrete
    eigenvalue problem is fixed while omega varies.
    """
    grid = grid_builder(stack, omega_guess)

    def mu_min(om: float) -> complex:
        L = assemble_operator(grid, stack, om, scheme=scheme)
        mu, _, _ = smallest_eigenpair(L)
        return mu

    lo, hi = bracket
    flo, fhi = mu_min(lo).real, mu_min(hi).real
    if flo * fhi > 0:
        raise SpectrumError(
            f"Re mu_min has no sign change over bracket {bracket}: "
            f"{flo:.3e} .. {fhi:.3e}"
        )
    omega0 = brentq(lambda om: mu_min(om).real, lo, hi, xtol=omega_tol)

    L = assemble_operator(grid, stack, omega0, scheme=scheme)
    mu0, v, _ = smallest_eigenpair(L)
    if abs(mu0.imag) > 1e-6 * max(1.0, abs(mu0)) + 1e-6:
        raise SpectrumError(
            f"residual eigenvalue is not real at the root: mu = {mu0:.3e}"
        )
    h = grid.h

    # adjoint kernel vector from the conjugate-transpose matrix
    mu_adj, w, _ = smallest_eigenpair(L.conjugate_transpose())

    # normalize: ||phi0|| = 1 and the center-phase gauge
    v = v / (math.sqrt(h) * np.linalg.norm(v))
    vc = v[grid.center_index]
    if abs(vc) > 1e-13:
        v = v * (abs(vc) / vc)
    phi0 = ComplexField(grid, v)

    ip = h * np.sum(v * np.conj(w))
    if abs(ip) < 1e-12:
        raise SpectrumError(
            "<phi0, phi0*> is numerically zero: eigenvalue not simple"
        )
    w = w / np.conj(ip)
    phi0_star = ComplexField(grid, w)

    if abs(mu_adj - np.conj(mu0)) > 1e-6 * max(1.0, abs(mu0)) + 1e-6:
        raise SpectrumError("adjoint eigenvalue mismatch; matrix corrupted")

    # transversality pairs phi0 against the exact omega-derivative of the
    # assembled operator (<dW/domega phi0, phi0*> in the continuum limit)
    D1 = assemble_operator_domega(grid, stack, omega0, order=1, scheme=scheme)
    transversality = -h * np.sum(D1.matvec(v) * np.conj(w))

    gap = _second_smallest_eigenvalue(L)

    if transversality == 0:
        raise SpectrumError("transversality vanishes: bifurcation degenerate")
    return EigenData(
        omega0=omega0,
        phi0=phi0,
        phi0_star=phi0_star,
        transversality=transversality,
        gap=gap,
        stack=stack,
        scheme=scheme,
    )


def mode_projection(u: ComplexField, eig: EigenData) -> ComplexField:
    """P0 u = <u, phi0*> phi0."""
    c = inner(u, eig.phi0_star)
    return ComplexField(u.grid, c * eig.phi0.values)


def complement_projection(u: ComplexField, eig: EigenData) -> ComplexField:
    """Q0 u = u - P0 u."""
    c = inner(u, eig.phi0_star)
    return ComplexField(u.grid, u.values - c * eig.phi0.values)


def adjoint_conjugation_defect(eig: EigenData) -> float:
    """Alignment defect between phi0* and conj(phi0), scale-normalized.

    For an exactly complex-symmetric discrete operator the adjoint kernel
    vector is conj(phi0) up to scaling, so this defect is at rounding
    level; interface-corrected operators give a small nonzero value.
    """
    v = eig.phi0.values
    w = eig.phi0_star.values
    h = eig.grid.h
    ref = np.conj(v)
    ip = h * np.sum(v * np.conj(ref))
    if abs(ip) < 1e-300:
        return math.inf
    ref = ref / np.conj(ip)   # same normalization rule as phi0_star
    scale = math.sqrt(h) * np.linalg.norm(ref)
    return math.sqrt(h) * np.linalg.norm(w - ref) / scale
