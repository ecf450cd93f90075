"""Nonlinear eigenvalue branches of TE surface plasmons in layered media.

The package computes, for 1D stacks of dispersive optical layers:

* the closed-form linear analysis of three-layer sandwiches (decay rates,
  admissible slab widths, real eigenfrequencies, PT-symmetry checks),
* Floquet/monodromy nonexistence arguments for two-layer geometries,
* finite-difference linear eigenpairs with the normalizations needed for
  the Lyapunov-Schmidt reduction,
* the bifurcation expansion coefficients (nu, sigma) and field
  corrections of the nonlinear eigenvalue branch, and
* PT-restricted Newton continuation of the branch itself.
"""

__version__ = "0.1.0"

from .materials import (
    LayerStack,
    MaterialModel,
    RescaleParams,
    constant_dielectric,
    drude,
    rescale_to_dimensionless,
)
from .layered import (
    admissible_width,
    decay_rates,
    eigenfunction,
    find_eigenfrequency,
    has_spectral_gap,
    is_pt_symmetric,
    scan_widths,
    width_candidates,
)
from .floquet import interface_quotients, monodromy, nonexistence_scan
from .grid import (
    BandedOperator,
    ComplexField,
    Grid,
    assemble_operator,
    build_grid,
    inner,
    norm,
    second_derivative,
)
from .spectrum import (
    EigenData,
    adjoint_conjugation_defect,
    complement_projection,
    mode_projection,
    smallest_eigenpair,
    solve_eigenpair,
)
from .expansion import (
    ExpansionData,
    SecondOrderData,
    expand,
    first_order_coefficient,
    first_order_correction,
    predictor,
    second_order_correction,
)
from .continuation import (
    Branch,
    BranchPoint,
    continue_branch,
    jacobian_apply,
    newton_solve,
    nonlinear_residual,
    pt_defect,
    pt_expand,
    pt_reduce,
    solve_at_amplitude,
)
