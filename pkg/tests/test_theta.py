from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qbirkhoff.errors import OnPoleSpiral, QTooCloseToOne, ZeroArgument
from qbirkhoff.theta import (
    CharacterPart,
    QContext,
    SpiralSet,
    lambda_char_eval,
    lq_eval,
    near_spiral,
    qpochhammer,
    qpochhammer_log,
    spiral_coordinate,
    theta_deriv_series,
    theta_eval,
    theta_series,
)

radius = st.floats(0.05, 20.0)
angle = st.floats(-math.pi, math.pi)


def _z(r, a):
    return r * cmath.exp(1j * a)


@given(radius, angle, st.floats(0.05, 2.0), st.floats(-0.8, 0.8))
def test_triple_product_matches_series(r, a, eps, arg_q):
    ctx = QContext(2.0 * cmath.exp(1j * arg_q), eps)
    z = _z(r, a)
    ref = theta_series(ctx, z)
    assert abs(theta_eval(ctx, z) - ref) <= 1e-12 * abs(ref) + 1e-300


def test_theta_complex_q():
    ctx = QContext(1.5 + 1.2j, 1.0)
    zs = np.array([0.3 + 0.4j, -2.2 + 1j, 5.0])
    np.testing.assert_allclose(theta_eval(ctx, zs), theta_series(ctx, zs), rtol=1e-12)


@given(radius, angle)
def test_theta_functional_equation(r, a):
    ctx = QContext(2.0, 0.25)
    z = _z(r, a)
    if near_spiral(ctx, z, -1.0, 1e-6):
        return
    lhs = theta_eval(ctx, ctx.q * z)
    rhs = z * theta_eval(ctx, z)
    assert abs(lhs - rhs) <= 1e-12 * abs(rhs)


def test_theta_zero_on_minus_one_and_errors():
    ctx = QContext(2.0)
    assert abs(theta_eval(ctx, -1.0)) < 1e-15
    assert abs(theta_eval(ctx, -ctx.q ** 3)) < 1e-12 * abs(ctx.q) ** 6
    with pytest.raises(ZeroArgument):
        theta_eval(ctx, 0.0)
    with pytest.raises(QTooCloseToOne):
        theta_eval(QContext(2.0, 1e-4), 1.0)


def test_qpochhammer_forms_agree():
    ctx = QContext(2.0, 0.5)
    w = np.array([0.3 + 0.2j, 3.0 - 1j, -7.0])
    for off in (0, 1):
        f, s = qpochhammer_log(ctx, w, off)
        np.testing.assert_allclose(f * np.exp(s), qpochhammer(ctx, w, off), rtol=1e-12)


def test_theta_equals_pochhammer_product():
    # Θ(z) = (1/q;1/q)_∞ (-z/q;1/q)_∞ (-1/z;1/q)_∞
    ctx = QContext(2.0, 1.0)
    z = 0.7 + 0.4j
    ref = ctx.c_inf * qpochhammer(ctx, -z, 1) * qpochhammer(ctx, -1 / z, 0)
    assert abs(theta_eval(ctx, z) - ref) < 1e-13 * abs(ref)


@given(radius, angle, st.builds(complex, st.floats(-3, 3), st.floats(-3, 3)))
def test_character_functional_equation(r, a, alpha):
    ctx = QContext(2.0, 0.5)
    if abs(alpha) < 0.1:
        alpha = 1.3 + 0.2j
    z = _z(r, a)
    if near_spiral(ctx, z, -alpha, 1e-3) or near_spiral(ctx, ctx.q * z, -alpha, 1e-3):
        return
    lhs = lambda_char_eval(ctx, alpha, ctx.q * z)
    rhs = alpha * lambda_char_eval(ctx, alpha, z)
    assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


def test_character_pole_spiral():
    ctx = QContext(2.0)
    with pytest.raises(OnPoleSpiral):
        lambda_char_eval(ctx, 3.0, -3.0 * ctx.q)


@given(radius, angle)
def test_q_logarithm(r, a):
    ctx = QContext(2.0, 0.5)
    z = _z(r, a)
    if near_spiral(ctx, z, -1.0, 1e-3):
        return
    assert abs(lq_eval(ctx, ctx.q * z) - lq_eval(ctx, z) - 1) < 1e-10
    ref = theta_deriv_series(ctx, z) / theta_series(ctx, z)
    assert abs(lq_eval(ctx, z) - ref) < 1e-10 * max(1, abs(ref))


def test_matrix_character_commutes():
    ctx = QContext(2.0, 0.5)
    for B in (np.array([[1.3, 0.4], [0.2, 0.7 + 0.1j]]), np.array([[2.0, 1.0], [0.0, 2.0]])):
        ch = CharacterPart(B, ctx)
        z = 0.8 + 0.5j
        L1, Lq = ch(z), ch(ctx.q * z)
        np.testing.assert_allclose(Lq, B @ L1, rtol=1e-10, atol=1e-12 * np.abs(Lq).max())
        np.testing.assert_allclose(Lq, L1 @ B, rtol=1e-10, atol=1e-12 * np.abs(Lq).max())


def test_spiral_geometry():
    ctx = QContext(2.0)
    n, d = spiral_coordinate(ctx, 8.0 * 3j, 3j)
    assert n == 3 and abs(d) < 1e-14
    s = SpiralSet((1.0, 3j), ctx)
    idx, dist = s.contains(0.25)
    assert idx == 0 and dist < 1e-12
    assert s.contains(0.3)[0] is None
