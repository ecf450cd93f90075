"""Dispersive material models and the layered optical potential.

All quantities are dimensionless: frequencies in units of a reference bulk
plasma frequency omega_p, lengths in units of c/omega_p, transverse
wavenumbers in units of omega_p/c.  SI values enter only through
:func:`rescale_to_dimensionless`.

A stack of homogeneous layers defines the complex potential

    W(x, omega) = omega^2 (1 + chi1(x, omega)) - k^2

of the TE wave equation phi'' + W phi + Gamma |phi|^2 phi = 0, with the
cubic coefficient Gamma(x, omega) = 3 omega^2 chi3(x).
"""

from __future__ import annotations

from dataclasses import dataclass


__all__ = [
    "MaterialError",
    "MaterialModel",
    "drude",
    "constant_dielectric",
    "LayerStack",
    "RescaleParams",
    "rescale_to_dimensionless",
]


class MaterialError(ValueError):
    """Raised for material evaluations outside the model's domain."""


@dataclass(frozen=True)
class MaterialModel:
    """A single layer's linear dispersion plus cubic coefficient.

    kind "drude":  chi1(omega) = -plasma^2 / (omega^2 + i gamma omega),
    the free-electron metal response with dimensionless collision rate
    gamma and plasma ratio `plasma` (bulk plasma frequency of the layer
    over the reference one; 1 for the reference metal).

    kind "const":  chi1(omega) = eta, a frequency-independent complex
    susceptibility (dielectric; lossy for Im eta < 0, active for > 0).
    """

    kind: str
    gamma: float = 0.0
    plasma: float = 1.0
    eta: complex = 0.0
    chi3: complex = 1.0

    def __post_init__(self):
        if self.kind not in ("drude", "const"):
            raise MaterialError(f"unknown material kind {self.kind!r}")
        if self.kind == "drude" and self.plasma <= 0:
            raise MaterialError("plasma ratio must be positive")

    def chi1(self, omega: float) -> complex:
        """Linear susceptibility chi1(omega)."""
        if self.kind == "const":
            return complex(self.eta)
        den = omega * (omega + 1j * self.gamma)
        if den == 0:
            raise MaterialError(
                f"Drude susceptibility undefined at omega={omega}"
            )
        return -self.plasma**2 / den

    def chi1_domega(self, omega: float, order: int = 1) -> complex:
        """Closed-form omega-derivative of chi1, order 1 or 2."""
        if order not in (1, 2):
            raise ValueError("derivative order must be 1 or 2")
        if self.kind == "const":
            return 0.0
        if omega == 0:
            raise MaterialError("Drude derivative undefined at omega=0")
        g = self.gamma
        # chi1 = -P^2/(omega^2 + i g omega)
        den = omega**2 + 1j * g * omega
        dden = 2 * omega + 1j * g
        if order == 1:
            return self.plasma**2 * dden / den**2
        return self.plasma**2 * (2.0 / den**2 - 2 * dden**2 / den**3)

    def pole_free(self, omega: float) -> bool:
        """True if chi1 is finite at this (real) frequency."""
        return self.kind == "const" or omega != 0

    def w_taylor_remainder(self, omega0: float, domega: complex) -> complex:
        """W(omega0+domega) minus its 2nd-order Taylor polynomial at omega0.

        Evaluated in closed form so that no large-term cancellation occurs
        (the remainder is O(domega^3) while W itself is O(1)).  For a
        constant dielectric W is a quadratic polynomial in omega, so the
        remainder vanishes identically; for the Drude model

            W = omega^2 - k^2 - P^2 + q(omega),  q = i gamma P^2/(omega+i gamma),

        and the geometric structure of q gives remainder
        -q(omega0) r^3/(1+r) with r = domega/(omega0+i gamma).
        """
        if self.kind == "const" or self.gamma == 0.0:
            return 0.0
        den = omega0 + 1j * self.gamma
        q0 = 1j * self.gamma * self.plasma**2 / den
        r = domega / den
        return -q0 * r**3 / (1.0 + r)


def drude(gamma: float, plasma: float = 1.0, chi3: complex = 1.0) -> MaterialModel:
    return MaterialModel(kind="drude", gamma=gamma, plasma=plasma, chi3=chi3)


def constant_dielectric(eta: complex, chi3: complex = 1.0) -> MaterialModel:
    return MaterialModel(kind="const", eta=eta, chi3=chi3)


@dataclass(frozen=True)
class LayerStack:
    """Ordered homogeneous layers separated by interfaces.

    len(layers) == len(interfaces) + 1; interface positions are strictly
    increasing.  Layer i occupies (interfaces[i-1], interfaces[i]); an
    interface point itself belongs to the layer on its right.
    """

    layers: tuple
    interfaces: tuple
    k: float

    def __init__(self, layers, interfaces, k):
        layers = tuple(layers)
        interfaces = tuple(float(x) for x in interfaces)
        if len(layers) != len(interfaces) + 1:
            raise ValueError(
                f"{len(layers)} layers need {len(layers) - 1} interfaces, "
                f"got {len(interfaces)}"
            )
        if any(b <= a for a, b in zip(interfaces, interfaces[1:])):
            raise ValueError("interface positions must be strictly increasing")
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "interfaces", interfaces)
        object.__setattr__(self, "k", float(k))

    def __len__(self):
        return len(self.layers)

    @property
    def width(self) -> float:
        """Total width of the bounded region (first to last interface)."""
        return self.interfaces[-1] - self.interfaces[0]

    @property
    def center(self) -> float:
        """Midpoint of the bounded region; the PT reflection point."""
        return 0.5 * (self.interfaces[0] + self.interfaces[-1])

    def layer_at(self, x: float) -> int:
        """Index of the layer containing x (right-continuous at interfaces)."""
        i = 0
        for xi in self.interfaces:
            if x >= xi:
                i += 1
        return i

    def potential(self, x: float, omega: float) -> complex:
        """W(x, omega) = omega^2 (1 + chi1) - k^2."""
        return self.layer_potential(self.layer_at(x), omega)

    def layer_potential(self, i: int, omega: float) -> complex:
        return omega**2 * (1.0 + self.layers[i].chi1(omega)) - self.k**2

    def potential_domega(self, x: float, omega: float, order: int = 1) -> complex:
        """Closed-form omega-derivative of W of given order (1 or 2)."""
        return self.layer_potential_domega(self.layer_at(x), omega, order)

    def layer_potential_domega(self, i: int, omega: float, order: int = 1) -> complex:
        m = self.layers[i]
        c = m.chi1(omega)
        c1 = m.chi1_domega(omega, 1)
        if order == 1:
            return 2 * omega * (1.0 + c) + omega**2 * c1
        if order == 2:
            c2 = m.chi1_domega(omega, 2)
            return 2 * (1.0 + c) + 4 * omega * c1 + omega**2 * c2
        raise ValueError("derivative order must be 1 or 2")

    def layer_potential_remainder(self, i: int, omega0: float, domega: complex) -> complex:
        """2nd-order Taylor remainder of W in omega, cancellation-free."""
        return self.layers[i].w_taylor_remainder(omega0, domega)

    def gamma_coeff(self, x: float, omega: float) -> complex:
        """Cubic coefficient Gamma(x, omega) = 3 omega^2 chi3(x)."""
        return 3 * omega**2 * self.layers[self.layer_at(x)].chi3

    def layer_gamma(self, i: int, omega: float) -> complex:
        return 3 * omega**2 * self.layers[i].chi3

    def admissible(self, omega: float) -> bool:
        """True if every layer's dispersion is pole-free at omega."""
        return all(m.pole_free(omega) for m in self.layers)


@dataclass(frozen=True)
class RescaleParams:
    """Reference plasma frequency (s^-1) and speed of light (m/s)."""

    omega_p: float
    c: float = 299792458.0

    def __post_init__(self):
        if self.omega_p <= 0 or self.c <= 0:
            raise ValueError("omega_p and c must be positive")


def rescale_to_dimensionless(params: RescaleParams, omega_SI=0.0, k_SI=0.0, x_SI=0.0):
    """Map SI (omega, k, x) to the dimensionless units used everywhere else."""
    return (
        omega_SI / params.omega_p,
        params.c * k_SI / params.omega_p,
        params.omega_p * x_SI / params.c,
    )
