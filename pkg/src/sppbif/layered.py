"""Closed-form linear analysis of the three-layer sandwich.

For a stack W_- | W_* | W_+ with interfaces at 0 and d, a localized
solution of phi'' + W phi = 0 exists iff the slab width d hits one of the
countable family of admissible widths

    d_m = [ Log((mu-l_-)(mu-l_+) / ((mu+l_-)(mu+l_+))) + 2 pi i m ] / (2 mu),

where l_pm = sqrt(-W_pm) are the outer decay rates (Re > 0) and
mu = sqrt(-W_*) the inner rate.  Branch conventions used throughout:
l_pm is the principal root; mu takes arg in [-pi/2, pi/2) (so an
oscillatory middle layer gets mu = -i|mu|) and the Log argument is taken
in [0, 2 pi).  With these choices m = -1, -2, ... enumerate the positive
width families in increasing order, and m = -1 is the fundamental one.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .materials import LayerStack

__all__ = [
    "LayeredError",
    "SingularWidthError",
    "NoDecayError",
    "ThreeLayerRates",
    "EigenConstants",
    "WidthCondition",
    "has_spectral_gap",
    "decay_rates",
    "admissible_width",
    "scan_widths",
    "width_candidates",
    "find_eigenfrequency",
    "eigenfunction",
    "is_pt_symmetric",
]

_IN_SPECTRUM_TOL = 1e-12


class LayeredError(ValueError):
    pass


class SingularWidthError(LayeredError):
    """Width condition degenerates (mu = 0 or mu = -l_pm)."""


class NoDecayError(LayeredError):
    """No exponentially decaying solution on a half-line (Re l <= 0)."""


def _sqrt_decay(z: complex) -> complex:
    """Principal square root, arg in (-pi/2, pi/2]."""
    r = cmath.sqrt(z)
    if r.real < 0 or (r.real == 0 and r.imag < 0):
        r = -r
    return r


def _sqrt_inner(z: complex) -> complex:
    """Square root with arg in [-pi/2, pi/2): negative reals map to -i sqrt|z|."""
    r = cmath.sqrt(z)
    if r.real < 0 or (r.real == 0 and r.imag > 0):
        r = -r
    return r


def _require_three(stack: LayerStack):
    if len(stack) != 3:
        raise LayeredError("closed-form analysis needs exactly 3 layers")


@dataclass(frozen=True)
class ThreeLayerRates:
    """Outer decay rates and inner rate of the sandwich at one frequency."""

    lambda_minus: complex
    lambda_plus: complex
    mu: complex


@dataclass(frozen=True)
class EigenConstants:
    """Amplitudes of the piecewise eigenfunction, normalized to D = 1."""

    A: complex
    B: complex
    C: complex
    D: complex = 1.0


@dataclass(frozen=True)
class WidthCondition:
    m: int
    dtilde: complex


def has_spectral_gap(stack: LayerStack, omega: float) -> bool:
    """True iff 0 avoids both half-line essential spectra.

    The essential spectrum contributed by a homogeneous outer layer is the
    half line {t - W : t >= 0}; it contains 0 exactly when W is real and
    nonnegative.
    """
    _require_three(stack)
    for i in (0, 2):
        W = stack.layer_potential(i, omega)
        if abs(W.imag) <= _IN_SPECTRUM_TOL and W.real >= -_IN_SPECTRUM_TOL:
            return False
    return True


def decay_rates(stack: LayerStack, omega: float) -> ThreeLayerRates:
    """Rates (l_-, l_+, mu); raises NoDecayError if an outer rate has Re <= 0."""
    _require_three(stack)
    lm = _sqrt_decay(-stack.layer_potential(0, omega))
    lp = _sqrt_decay(-stack.layer_potential(2, omega))
    if lm.real <= 0 or lp.real <= 0:
        raise NoDecayError(
            f"no decaying half-line solution at omega={omega}: "
            f"Re(lambda) = {lm.real:.3e}, {lp.real:.3e}"
        )
    mu = _sqrt_inner(-stack.layer_potential(1, omega))
    return ThreeLayerRates(lambda_minus=lm, lambda_plus=lp, mu=mu)


def _width_ratio(rates: ThreeLayerRates) -> complex:
    lm, lp, mu = rates.lambda_minus, rates.lambda_plus, rates.mu
    scale = abs(mu) + abs(lm) + abs(lp)
    if abs(mu) < 1e-12 * scale:
        raise SingularWidthError("mu = 0: width condition degenerates")
    for lam in (lm, lp):
        if abs(mu + lam) < 1e-12 * (abs(mu) + abs(lam)):
            raise SingularWidthError("mu = -lambda: log argument degenerates")
        if abs(mu - lam) < 1e-12 * (abs(mu) + abs(lam)):
            raise SingularWidthError("mu = lambda: log argument degenerates")
    return ((mu - lm) * (mu - lp)) / ((mu + lm) * (mu + lp))


def admissible_width(stack: LayerStack, omega: float, m: int) -> complex:
    """The m-th admissible (generally complex) slab width at this frequency."""
    rates = decay_rates(stack, omega)
    ratio = _width_ratio(rates)
    arg = cmath.phase(ratio) % (2 * math.pi)
    log_ratio = complex(math.log(abs(ratio)), arg)
    return (log_ratio + 2j * math.pi * m) / (2 * rates.mu)


def width_candidates(stack: LayerStack, omega: float, m_values=range(-5, 6)):
    """All admissible-width candidates at one frequency, one per branch m."""
    return [WidthCondition(m=m, dtilde=admissible_width(stack, omega, m))
            for m in m_values]


def scan_widths(stack: LayerStack, omega_range, steps: int, m: int):
    """Sample admissible_width over a frequency range.

    Returns a list of rows (omega, re_dtilde, im_dtilde, singular_flag);
    singular samples carry NaNs and the scan continues.
    """
    lo, hi = omega_range
    rows = []
    for omega in np.linspace(lo, hi, steps):
        try:
            d = admissible_width(stack, float(omega), m)
            rows.append((float(omega), d.real, d.imag, False))
        except LayeredError:
            rows.append((float(omega), math.nan, math.nan, True))
    return rows


def find_eigenfrequency(
    stack: LayerStack,
    d: float,
    m: int,
    bracket,
    scan_points: int = 200,
    tol: float = 1e-10,
) -> float:
    """Real frequency at which the m-th admissible width equals d.

    Scans the bracket for a sign change of Re(dtilde) - d, then bisects and
    polishes with secant steps to |d omega| <= tol.  Requires the stack to
    be PT symmetric so that the width is real along the branch.
    """
    lo, hi = bracket

    def f(om):
        return admissible_width(stack, om, m).real - d

    oms = np.linspace(lo, hi, scan_points)
    vals = np.full(scan_points, np.nan)
    for i, om in enumerate(oms):
        try:
            vals[i] = f(float(om))
        except LayeredError:
            pass
    a = b = None
    for i in range(scan_points - 1):
        if np.isfinite(vals[i]) and np.isfinite(vals[i + 1]) and vals[i] * vals[i + 1] < 0:
            a, b, fa, fb = float(oms[i]), float(oms[i + 1]), vals[i], vals[i + 1]
            break
    if a is None:
        raise LayeredError(
            f"no sign change of Re(dtilde_{m}) - d over bracket {bracket}"
        )
    # bisection until comfortably inside, then secant polish
    while b - a > 1e6 * tol:
        c = 0.5 * (a + b)
        fc = f(c)
        if fa * fc <= 0:
            b, fb = c, fc
        else:
            a, fa = c, fc
    x0, x1, f0, f1 = a, b, fa, fb
    for _ in range(100):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        x2 = min(max(x2, a), b)
        if abs(x2 - x1) <= tol:
            x0, x1 = x1, x2
            break
        x0, f0, x1, f1 = x1, f1, x2, f(x2)
    omega0 = x1
    dt = admissible_width(stack, omega0, m)
    if abs(dt.imag) > 1e-8:
        raise LayeredError(
            f"admissible width is not real at the root "
            f"(Im = {dt.imag:.2e}); stack is not PT symmetric"
        )
    return omega0


def eigenfunction(stack: LayerStack, omega0: float, d: float, width_tol: float = 1e-8):
    """Closed-form eigenfunction at a root of the width condition.

    Returns (EigenConstants, profile) where profile maps x (scalar or
    array) to the piecewise field

        A e^{l_- x}           x < 0
        B e^{mu x} + C e^{-mu x}   0 <= x < d
        D e^{-l_+ x}          x >= d

    positions measured from the first interface.  Raises if the matching
    residual at the interfaces exceeds width_tol relatively.
    """
    rates = decay_rates(stack, omega0)
    lm, lp, mu = rates.lambda_minus, rates.lambda_plus, rates.mu
    if abs(mu) == 0:
        raise SingularWidthError("mu = 0")
    emu = cmath.exp(-mu * d)
    epu = cmath.exp(mu * d)
    A = cmath.exp(-lp * d) / 2 * ((1 - lp / mu) * emu + (1 + lp / mu) * epu)
    B = 0.5 * (1 - lp / mu) * cmath.exp(-(mu + lp) * d)
    C = 0.5 * (1 + lp / mu) * cmath.exp((mu - lp) * d)
    const = EigenConstants(A=A, B=B, C=C, D=1.0)

    # The constants satisfy the x = d matching and the x = 0 value matching
    # identically; the remaining x = 0 slope matching holds exactly when the
    # width condition does, so its residual measures how far omega0 is from
    # a true eigenfrequency.
    der_in = A * lm
    der_mid = mu * (B - C)
    dscale = max(abs(der_in), abs(der_mid), 1e-300)
    if abs(der_in - der_mid) > width_tol * dscale:
        raise LayeredError(
            f"interface matching fails at omega={omega0}: width condition "
            f"violated beyond {width_tol} (defect "
            f"{abs(der_in - der_mid) / dscale:.2e})"
        )

    x0 = stack.interfaces[0]

    def profile(x):
        xr = np.asarray(x, dtype=float) - x0
        out = np.empty(xr.shape, dtype=complex)
        left = xr < 0
        mid = (xr >= 0) & (xr < d)
        right = xr >= d
        out[left] = A * np.exp(lm * xr[left])
        out[mid] = B * np.exp(mu * xr[mid]) + C * np.exp(-mu * xr[mid])
        out[right] = np.exp(-lp * xr[right])
        return out if out.shape else complex(out)

    return const, profile


def is_pt_symmetric(stack: LayerStack, omega: float, n_samples: int = 64, tol: float = 1e-9) -> bool:
    """Check W(c - x, omega) == conj(W(c + x, omega)) about the stack center."""
    _require_three(stack)
    c = stack.center
    half = stack.width
    # half-offset samples so mirrored pairs never straddle an interface node
    xs = (np.arange(n_samples) + 0.5) * (2.0 * half / n_samples)
    scale = max(abs(stack.layer_potential(i, omega)) for i in range(3))
    for x in xs:
        wl = stack.potential(c - x, omega)
        wr = stack.potential(c + x, omega)
        if abs(wl - wr.conjugate()) > tol * max(1.0, scale):
            return False
    return True
