import numpy as np
import pytest

import sppbif as s

PLASMA3 = float(np.sqrt(2 * np.pi))


def case2_stack(chi3=1.0):
    return s.LayerStack(
        [
            s.constant_dielectric(9.2 - 1.28j, chi3=chi3),
            s.drude(0.0, chi3=chi3),
            s.constant_dielectric(9.2 + 1.28j, chi3=chi3),
        ],
        [0.0, 1.0],
        2.0,
    )


def case3_stack(chi3=1.0):
    return s.LayerStack(
        [
            s.drude(-0.5, plasma=PLASMA3, chi3=chi3),
            s.constant_dielectric(0.2, chi3=chi3),
            s.drude(0.5, plasma=PLASMA3, chi3=chi3),
        ],
        [0.0, 0.5],
        2.0,
    )


def case1_stack(gamma=0.5):
    return s.LayerStack(
        [s.constant_dielectric(0.05), s.drude(gamma), s.constant_dielectric(5.0)],
        [0.0, 1.0],
        1.0,
    )


@pytest.fixture(scope="session")
def c2():
    return case2_stack()


@pytest.fixture(scope="session")
def c3():
    return case3_stack()


@pytest.fixture(scope="session")
def c1():
    return case1_stack()


def grid_builder(n, padding=10.0):
    return lambda stack, om: s.build_grid(stack, padding, n, omega=om)


@pytest.fixture(scope="session")
def eig2():
    """Case-2 discrete eigenpair at n=2048 (workhorse for unit tests)."""
    return s.solve_eigenpair(case2_stack(), grid_builder(2048), 3.83, (3.7, 3.95))


@pytest.fixture(scope="session")
def eig3():
    return s.solve_eigenpair(case3_stack(), grid_builder(2048), 2.81, (2.75, 2.87))


@pytest.fixture(scope="session")
def exp2(eig2):
    return s.expand(eig2)


@pytest.fixture(scope="session")
def exp3(eig3):
    return s.expand(eig3)


@pytest.fixture(scope="session")
def eig2_fine():
    """Case-2 eigenpair at the acceptance resolution n=4096."""
    return s.solve_eigenpair(case2_stack(), grid_builder(4096), 3.83, (3.7, 3.95))


@pytest.fixture(scope="session")
def eig3_fine():
    return s.solve_eigenpair(case3_stack(), grid_builder(4096), 2.81, (2.75, 2.87))
