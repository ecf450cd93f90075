"""Two-layer linear analysis via Hill-equation monodromy.

A single interface at x = 0 joins two half-lines carrying x-periodic
(possibly constant) potentials.  Decaying solutions on each side are Bloch
waves p(x) e^{-lambda |x|}; the C^1 matching condition reduces to equality
of the logarithmic derivatives R_pm = phi'_pm(0) / phi_pm(0).  When one
side is a non-conservative homogeneous medium (complex W) and the other a
conservative periodic one, Im R_- != 0 while R_+ is real, so no eigenvalue
exists; :func:`nonexistence_scan` quantifies the mismatch over a frequency
range.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

__all__ = [
    "FloquetError",
    "MarginalSpectrumError",
    "MonodromyResult",
    "InterfaceQuotients",
    "monodromy",
    "interface_quotients",
    "nonexistence_scan",
]


class FloquetError(ValueError):
    pass


class MarginalSpectrumError(FloquetError):
    """Both multipliers on the unit circle: 0 lies in the Bloch spectrum."""


@dataclass(frozen=True)
class MonodromyResult:
    M: np.ndarray
    multipliers: tuple
    exponent: complex
    period: float


def monodromy(W_profile, period: float, steps: int = 2048) -> MonodromyResult:
    """Fundamental solution of phi'' + W phi = 0 over one period.

    Fixed-step classical RK4 on the first-order system from identity
    initial data.  The Floquet exponent is -log(rho)/period for the
    multiplier rho inside the unit circle; raises MarginalSpectrumError if
    both multipliers sit on the circle (no decaying Bloch solution).
    """
    if period <= 0:
        raise FloquetError("period must be positive")
    if steps < 100:
        raise FloquetError("need at least 100 integration steps")
    h = period / steps
    Y = np.eye(2, dtype=complex)

    def rhs(x, Y):
        W = complex(W_profile(x))
        return np.array([Y[1], -W * Y[0]], dtype=complex)

    x = 0.0
    for _ in range(steps):
        k1 = rhs(x, Y)
        k2 = rhs(x + 0.5 * h, Y + 0.5 * h * k1)
        k3 = rhs(x + 0.5 * h, Y + 0.5 * h * k2)
        k4 = rhs(x + h, Y + h * k3)
        Y = Y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        x += h

    rho = np.linalg.eigvals(Y)
    rho = tuple(sorted(rho, key=abs))
    if abs(abs(rho[0]) - 1.0) < 1e-10 and abs(abs(rho[1]) - 1.0) < 1e-10:
        raise MarginalSpectrumError(
            "both Floquet multipliers are unimodular; no decaying solution"
        )
    exponent = -np.log(rho[0]) / period
    return MonodromyResult(M=Y, multipliers=rho, exponent=exponent, period=period)


@dataclass(frozen=True)
class InterfaceQuotients:
    R_plus: complex
    R_minus: complex

    @property
    def gap(self) -> float:
        return abs(self.R_plus - self.R_minus)


def _decaying_quotient_right(W_profile, period, steps) -> complex:
    """phi'(0)/phi(0) of the rightward-decaying Bloch solution.

    Real conservative periodic media can have 2*period-periodic Bloch
    factors, so the monodromy is tried over both period and 2*period and
    the first non-marginal one is used.
    """
    last = None
    for per in (period, 2.0 * period):
        try:
            res = monodromy(W_profile, per, max(steps, int(steps * per / period)))
        except MarginalSpectrumError as exc:
            last = exc
            continue
        M = res.M
        rho = res.multipliers[0]
        # eigenvector of M for the decaying multiplier
        a, b, c, d = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
        if abs(b) >= abs(rho - a):
            v = np.array([b, rho - a])
        else:
            v = np.array([rho - d, c])
        if abs(v[0]) < 1e-14 * abs(v[1]):
            raise FloquetError(
                "Bloch solution vanishes at the interface; only the trivial "
                "solution matches"
            )
        return v[1] / v[0]
    raise last


def interface_quotients(
    left_W, right_W, omega: float, period: float = 1.0, steps: int = 2048
) -> InterfaceQuotients:
    """Logarithmic derivatives R_- and R_+ of the decaying solutions at x=0.

    left_W: complex constant (homogeneous left medium), so that the
    leftward-decaying solution is e^{lambda_- x} and R_- = lambda_-.
    right_W: callable x -> W(x) over one period (conservative, possibly
    constant), handled through the monodromy matrix.
    """
    Wl = complex(left_W)
    lam = np.sqrt(-Wl)
    if lam.real < 0 or (lam.real == 0 and lam.imag < 0):
        lam = -lam
    if lam.real <= 1e-12:
        raise MarginalSpectrumError("left half-line has no decaying solution")
    R_minus = lam
    R_plus = _decaying_quotient_right(right_W, period, steps)
    return InterfaceQuotients(R_plus=complex(R_plus), R_minus=complex(R_minus))


def nonexistence_scan(
    left_W_of_omega,
    right_W_of_omega,
    omega_range,
    samples: int = 101,
    period: float = 1.0,
    steps: int = 1024,
    threads: int = 1,
):
    """Tabulate the matching gap |R_+ - R_-| over a frequency range.

    left_W_of_omega(omega) -> complex constant;
    right_W_of_omega(omega) -> callable x -> W(x).
    Returns (rows, summary): rows of (omega, R_plus, R_minus, gap) and a
    summary dict with the minimum gap, the minimum |Im R_-| and whether the
    nonexistence argument applies (left side genuinely non-conservative).
    With threads > 1 the omega samples are integrated concurrently; row
    order stays deterministic.
    """
    lo, hi = omega_range
    omegas = [float(om) for om in np.linspace(lo, hi, samples)]

    def one(omega):
        try:
            q = interface_quotients(
                left_W_of_omega(omega), right_W_of_omega(omega),
                omega, period=period, steps=steps,
            )
        except MarginalSpectrumError:
            # 0 in the Bloch spectrum: no localized state at this omega
            # for the trivial reason; record and move on.
            return (omega, complex("nan"), complex("nan"), math.nan)
        return (omega, q.R_plus, q.R_minus, q.gap)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, omegas))
    else:
        rows = [one(om) for om in omegas]
    marginal = sum(1 for r in rows if math.isnan(r[3]))
    valid = [r for r in rows if not math.isnan(r[3])]
    min_gap = min((r[3] for r in valid), default=math.nan)
    min_im = min((abs(r[2].imag) for r in valid), default=math.nan)
    summary = {
        "samples": len(rows),
        "marginal_samples": marginal,
        "min_gap": min_gap,
        "min_abs_im_R_minus": min_im,
        "argument_applies": bool(valid) and min_im > 1e-10,
    }
    return rows, summary
