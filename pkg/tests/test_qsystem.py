from __future__ import annotations

import cmath

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qbirkhoff.errors import PoleAtZeroOrInfinity, Resonant, SingularLeadingMatrix
from qbirkhoff.linalg import RationalFunction, RationalMatrix, fuchsian_form
from qbirkhoff.qsystem import analyze_sigma_p, analyze_system, functional_residual, local_series
from qbirkhoff.theta import QContext, near_spiral, theta_eval

from conftest import random_residues


def _two_by_two(eps: float = 0.5, seed: int = 1):
    ctx = QContext(2.0, eps)
    A0, A1, At = random_residues(seed)
    p = 1 / ctx.q
    Ap = fuchsian_form(np.eye(2) + (p - 1) * A0, [1.0, 0.4 + 0.9j], [(p - 1) * A1, (p - 1) * At])
    return analyze_sigma_p(ctx, RationalFunction.from_roots([1.0, 0.4 + 0.9j], []), Ap)


def test_theta_system_local_solutions_are_theta():
    # Y(qz) = z Y: both local solutions equal Θ itself
    ctx = QContext(2.0, 1.0)
    sys = analyze_system(ctx, RationalFunction([0.0, 1.0], [1.0]), np.eye(1))
    assert sys.mu0 == 1 and sys.muInf == 1
    y0, yi = local_series(sys, "origin"), local_series(sys, "infinity")
    for z in (0.3 + 0.2j, -4.0 + 1j, 17j):
        th = theta_eval(ctx, z)
        assert abs(y0(z)[0, 0] - th) < 1e-12 * abs(th)
        assert abs(yi(z)[0, 0] - th) < 1e-12 * abs(th)


def test_leading_data_of_sigma_p_form():
    sys = _two_by_two()
    # normalized M(z) = (R_p(qz) A_p(qz))^{-1}: at 0 the valuation of R_p is 0
    assert sys.mu0 == 0 and sys.muInf == -2
    z = 0.37 - 0.2j
    ref = np.linalg.inv(sys.R(sys.q * z) * sys.A(np.array([sys.q * z]))[0])
    np.testing.assert_allclose(sys.M(np.array([z]))[0], ref, rtol=1e-12)


@given(st.floats(-2.5, 2.5), st.floats(-3.1, 3.1))
def test_local_solutions_satisfy_system(lr, th):
    sys = _two_by_two()
    z = cmath.exp(lr + 1j * th)
    if any(near_spiral(sys.ctx, z, a, 1e-3) for a in [-1.0, *sys.S0, *sys.SInf]):
        return
    for side in ("origin", "infinity"):
        sol = local_series(sys, side)
        assert functional_residual(sol, z) < 1e-10


def test_series_normalized_at_base_point():
    sys = _two_by_two()
    sol = local_series(sys, "origin")
    np.testing.assert_allclose(sol.coeffs[0], np.eye(2))
    np.testing.assert_allclose(sol.series(1e-9), np.eye(2), atol=1e-8)


def test_resonant_leading_matrix_rejected():
    ctx = QContext(2.0, 1.0)
    with pytest.raises(Resonant) as ei:
        analyze_system(ctx, 1.0, np.diag([1.0, 2.0]))
    assert "modulo q^Z" in ei.value.hypothesis


def test_pole_at_zero_rejected():
    ctx = QContext(2.0, 1.0)
    one = RationalFunction([1.0], [1.0])
    zero = RationalFunction([0.0], [1.0])
    A = RationalMatrix(((RationalFunction([1.0, 1.0], [0.0, 1.0]), zero), (zero, one)))
    with pytest.raises(PoleAtZeroOrInfinity):
        analyze_system(ctx, 1.0, A)


def test_singular_leading_matrix_rejected():
    ctx = QContext(2.0, 1.0)
    with pytest.raises(SingularLeadingMatrix):
        analyze_system(ctx, 1.0, np.array([[1.0, 1.0], [1.0, 1.0]]))
