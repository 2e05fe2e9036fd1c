from __future__ import annotations

import numpy as np
import pytest

from qbirkhoff.errors import HypothesisViolation
from qbirkhoff.isomonodromy import (
    HYP_POLES,
    HYP_R_RATIO,
    DeformationFamily,
    deformation_matrix_eval,
    lax_residual,
    pseudo_constancy_test,
    rationality_check,
)
from qbirkhoff.linalg import RationalFunction
from qbirkhoff.qsystem import analyze_sigma_p, analyze_system
from qbirkhoff.theta import QContext

CTX = QContext(2.0, 1.0)
U = 0.7 + 0.2j
PROBES = np.array([1.3 + 0.4j, -0.8 + 1.1j, 1.7 - 0.2j, 0.2 + 1.9j])


def _positive(t):
    R = RationalFunction.from_roots([U * t, t / U], [t, t])
    return analyze_system(CTX, R, np.eye(1))


def _negative(t):
    # pole moves with t but zeros stay put: not connection preserving
    R = RationalFunction.from_roots([0.5, 2.0], [t, t])
    return analyze_system(CTX, R, np.eye(1))


def test_positive_family_is_pseudo_constant():
    t = 0.5 + 0.3j
    fam = DeformationFamily(_positive, [t])
    pc = pseudo_constancy_test(fam, t, PROBES)
    assert pc.pseudoConstant, pc.maxResidual
    assert fam.proportional_poles(t)


def test_negative_family_is_not_pseudo_constant():
    t = 0.5 + 0.3j
    fam = DeformationFamily(_negative, [t])
    assert not pseudo_constancy_test(fam, t, PROBES).pseudoConstant


def test_deformation_matrix_is_rational_and_satisfies_lax():
    t = 0.5 + 0.3j
    fam = DeformationFamily(_positive, [t])
    B = lambda z: deformation_matrix_eval(fam, t, z)  # noqa: E731
    fit = rationality_check(B, sample_count=40, degree_bound=4, seed=1)
    assert fit.isRational and fit.error < 1e-6
    assert lax_residual(fam, t, B, PROBES) < 1e-9
    # both local solutions give the same B for a pseudo-constant family
    for z in PROBES:
        np.testing.assert_allclose(
            deformation_matrix_eval(fam, t, z, "infinity"), B(z), rtol=1e-8
        )


def test_negative_family_sides_disagree():
    # rank one: B stays rational, but the two local solutions give different B
    t = 0.5 + 0.3j
    fam = DeformationFamily(_negative, [t])
    z = PROBES[0]
    b0 = deformation_matrix_eval(fam, t, z, "origin")
    bi = deformation_matrix_eval(fam, t, z, "infinity")
    assert np.linalg.norm(b0 - bi) > 1e-3 * np.linalg.norm(b0)


def test_r0_ratio_guard():
    def shifted(t):
        return analyze_sigma_p(CTX, RationalFunction([-(t + 1), 1.0], [1.0]), np.eye(1))

    with pytest.raises(HypothesisViolation) as ei:
        DeformationFamily(shifted, [0.5])
    assert ei.value.hypothesis == HYP_R_RATIO


def test_pole_class_guard():
    def wandering(t):
        return analyze_system(CTX, RationalFunction.from_roots([t + 1.0], [2 * (t + 1.0)]), np.eye(1))

    with pytest.raises(HypothesisViolation) as ei:
        DeformationFamily(wandering, [0.3 + 0.2j])
    assert ei.value.hypothesis == HYP_POLES
