from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from scipy.linalg import expm

from qbirkhoff.confluence import (
    ConfluenceFamily,
    epsilon_sweep,
    eval_ode_solution,
    frobenius_series,
    global_monodromy_residual,
    monodromy_det_residual,
    ode_connection,
    ode_monodromy_oracle,
    sector_index,
    sector_midpoints,
    sector_monodromy_check,
    sector_partition,
    to_qsystem,
)
from qbirkhoff.errors import HypothesisViolation, OnSpiralRay, ResonantExponents, UnsupportedSpiralGeometry


def _family(scheme: str = "sigma_p") -> ConfluenceFamily:
    rng = np.random.default_rng(3)

    def rm():
        return (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) * 0.2

    C0, C1, Ct = rm(), rm(), rm()
    return ConfluenceFamily(C0, (1.0, 2j), (C1, Ct), 2.0, scheme)


def _rhs_residual(fam, frob, z, h=1e-5):
    # z Y' = Ã Y by central differences
    dY = (frob(z + h) - frob(z - h)) / (2 * h)
    return np.linalg.norm(z * dY - fam.tildeA_eval(z) @ frob(z)) / np.linalg.norm(frob(z))


def test_frobenius_solutions_solve_ode():
    fam = _family()
    f0 = frobenius_series(fam, "origin")
    fi = frobenius_series(fam, "infinity")
    assert f0.recursion_residual() < 1e-12 and fi.recursion_residual() < 1e-12
    assert _rhs_residual(fam, f0, 0.2 + 0.1j) < 1e-8
    assert _rhs_residual(fam, fi, 5.0 - 3.0j) < 1e-8


def test_pole_free_family_has_global_solutions():
    A = np.array([[0.1, 0.3], [0.0, -0.2]])
    fam = ConfluenceFamily(A, (), ())
    z = 3.0 + 4.0j
    np.testing.assert_allclose(
        eval_ode_solution(frobenius_series(fam, "origin"), z),
        expm(A * cmath.log(z)),
        rtol=1e-12,
    )
    np.testing.assert_allclose(ode_monodromy_oracle(fam, None), np.eye(2), atol=1e-10)


def test_monodromy_determinant_and_trivial_loop():
    fam = _family()
    for j in range(2):
        M = ode_monodromy_oracle(fam, j)
        assert monodromy_det_residual(fam, j, M) < 1e-8
    np.testing.assert_allclose(ode_monodromy_oracle(fam, None), np.eye(2), atol=1e-9)


def test_sector_partition_orders_rays():
    part = sector_partition(_family())
    assert part.m == 2
    # angles of 1 (2π) and 2i (5π/2) in [π, 3π)
    assert part.phi == (0, 1, 2, 3)
    assert [sector_index(part, z) for z in sector_midpoints(part)] == [0, 1, 2]
    with pytest.raises(OnSpiralRay):
        sector_index(part, 3.0)


def test_sector_partition_guards():
    fam = ConfluenceFamily(np.zeros((1, 1)), (-2.0,), (np.eye(1) * 0.1,))
    with pytest.raises(HypothesisViolation):
        sector_partition(fam)
    fam = ConfluenceFamily(np.zeros((1, 1)), (1.0, 3.0), (np.eye(1) * 0.1, np.eye(1) * 0.2))
    with pytest.raises(HypothesisViolation):
        sector_partition(fam)
    fam = ConfluenceFamily(np.zeros((1, 1)), (1.0j,), (np.eye(1) * 0.1,), q0=2.0 * cmath.exp(0.2j))
    with pytest.raises(UnsupportedSpiralGeometry):
        sector_partition(fam)


def test_resonant_exponents_rejected():
    fam = ConfluenceFamily(np.diag([0.0, 1.0]), (1.0j,), (np.eye(2) * 0.1,))
    with pytest.raises(ResonantExponents):
        frobenius_series(fam, "origin")


@pytest.mark.parametrize("scheme", ["sigma_p", "delta"])
def test_discretization_has_expected_leading_data(scheme):
    fam = _family(scheme)
    sys = to_qsystem(fam, 0.25)
    q = sys.q
    # B0 is the q-deformed exponent: q^{Ã0} to first order
    ref = np.eye(2) + math.log(abs(q)) * fam.tildeA0
    assert np.linalg.norm(sys.B0 - ref) < 0.1


def test_sweep_converges_towards_ode_connection():
    fam = _family()
    part = sector_partition(fam)
    zs = sector_midpoints(part)
    rep = epsilon_sweep(fam, zs, tuple(2.0**-k for k in range(1, 6)))
    for p in rep.probes:
        assert all(e is None for e in p.errors)
        assert p.decreasing_from(1)
        ode = ode_connection(fam, p.z)
        d = [np.linalg.norm(v - ode) / np.linalg.norm(ode) for v in p.values]
        assert d[-1] < d[0] and d[-1] < 0.1
    for j in (1, 2):
        res, bar = sector_monodromy_check(rep, fam, j)
        assert res < 0.1
    assert global_monodromy_residual(rep, fam) < 0.1
