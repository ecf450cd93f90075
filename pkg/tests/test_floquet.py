import numpy as np
import pytest

import sppbif as s
from sppbif.floquet import FloquetError, MarginalSpectrumError, nonexistence_scan


def test_monodromy_constant_decaying():
    res = s.monodromy(lambda x: -1.0, 1.0, steps=2048)
    mags = sorted(abs(m) for m in res.multipliers)
    assert mags[0] == pytest.approx(np.exp(-1.0), abs=1e-8)
    assert mags[1] == pytest.approx(np.exp(1.0), abs=1e-8)
    assert res.exponent == pytest.approx(1.0, abs=1e-8)
    assert abs(np.linalg.det(res.M) - 1.0) <= 1e-8


def test_monodromy_constant_oscillatory_is_marginal():
    with pytest.raises(MarginalSpectrumError):
        s.monodromy(lambda x: 1.0, 1.0, steps=512)


def test_monodromy_validation():
    with pytest.raises(FloquetError):
        s.monodromy(lambda x: -1.0, -1.0, 512)
    with pytest.raises(FloquetError):
        s.monodromy(lambda x: -1.0, 1.0, 10)


def test_monodromy_periodic_wronskian_and_convergence():
    W = lambda x: -1.0 - 0.3 * np.cos(2 * np.pi * x)
    exps = []
    for steps in (256, 512, 1024):
        res = s.monodromy(W, 1.0, steps)
        assert abs(np.linalg.det(res.M) - 1.0) <= 1e-8
        exps.append(res.exponent)
    assert abs(exps[1] - exps[2]) <= 1e-6
    # 4th-order integrator: consecutive Richardson differences shrink >= 12x
    e1 = abs(exps[0] - exps[1])
    e2 = abs(exps[1] - exps[2])
    assert e1 / max(e2, 1e-300) >= 12.0


def test_monodromy_homogeneous_limit_matches_sqrt():
    for W0 in (-1.0, -4.0, -2.0 + 0.7j):
        res = s.monodromy(lambda x: W0, 1.0, steps=2048)
        lam = np.sqrt(-np.asarray(W0, dtype=complex))
        if lam.real < 0:
            lam = -lam
        assert res.exponent == pytest.approx(lam, abs=1e-8)


def test_interface_quotients_homogeneous():
    q = s.interface_quotients(-1.0, lambda x: -1.0, omega=1.0)
    assert q.R_minus == pytest.approx(1.0, abs=1e-10)
    assert q.R_plus == pytest.approx(-1.0, abs=1e-8)
    assert q.gap == pytest.approx(2.0, abs=1e-8)


def test_interface_quotient_constant_vs_closed_form():
    q = s.interface_quotients(-1.0, lambda x: -4.0, omega=1.0)
    assert q.R_plus == pytest.approx(-2.0, abs=1e-8)


def test_nonexistence_scan_drude_vs_constant():
    k = 2.0
    drude = s.drude(0.5)

    def left(om):
        return om**2 * (1 + drude.chi1(om)) - k**2

    def right(om):
        base = om**2 * (1 + 2.0) - k**2
        return lambda x: base

    rows, summary = nonexistence_scan(left, right, (0.5, 3.0), samples=51)
    assert summary["argument_applies"] is True
    assert summary["min_gap"] > 0
    assert summary["min_abs_im_R_minus"] > 1e-3
    # frequencies where the conservative side has no decaying Bloch wave
    # are flagged rather than fatal (no state exists there trivially)
    assert summary["marginal_samples"] > 0


def test_nonexistence_scan_conservative_left_inapplicable():
    def left(om):
        return om**2 * 1.5 - 4.0      # real

    def right(om):
        return lambda x: om**2 * 2.0 - 4.0

    rows, summary = nonexistence_scan(left, right, (0.5, 1.0), samples=11)
    assert summary["argument_applies"] is False


def test_nonexistence_scan_periodic_right():
    def left(om):
        d = s.drude(0.5)
        return om**2 * (1 + d.chi1(om)) - 4.0

    def right(om):
        return lambda x: -2.0 - 0.5 * np.cos(2 * np.pi * x)

    rows, summary = nonexistence_scan(left, right, (0.5, 1.2), samples=15,
                                      steps=512)
    assert summary["min_gap"] > 0
    assert summary["argument_applies"] is True
