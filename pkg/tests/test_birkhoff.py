from __future__ import annotations

import cmath

import numpy as np
import pytest

from qbirkhoff.birkhoff import admissible_probes, connection_matrix, ellipticity_residual, pole_scan
from qbirkhoff.linalg import RationalFunction
from qbirkhoff.qpvi import scalar_solutions
from qbirkhoff.qsystem import analyze_sigma_p
from qbirkhoff.theta import QContext, near_spiral

from test_qsystem import _two_by_two


def _rank_one(alpha: complex, eps: float = 1.0):
    ctx = QContext(2.0, eps)
    return analyze_sigma_p(ctx, RationalFunction([-alpha, 1.0], [1.0]), np.eye(1))


@pytest.mark.parametrize("alpha", [1 + 0.5j, -0.3 + 2j, 0.7])
def test_rank_one_connection_closed_form(alpha):
    P = connection_matrix(_rank_one(alpha))
    ref = scalar_solutions(P.ctx, alpha)
    rng = np.random.default_rng(5)
    for z in admissible_probes(P, 20, rng, rmin=0.2, guard=1e-3):
        assert abs(P(z)[0, 0] - ref.ratio(z)) < 1e-10 * abs(ref.ratio(z))


def test_closed_forms_solve_the_equation():
    ref = scalar_solutions(QContext(2.0, 0.7), 0.4 - 1.1j)
    for z in (0.3 + 0.1j, -2.0 + 0.5j, 5j):
        assert ref.functional_residual(z) < 1e-11


def test_connection_matrix_is_elliptic():
    P = connection_matrix(_two_by_two())
    assert ellipticity_residual(P, samples=40, seed=2) < 1e-8


def test_pole_scan_finds_registry_spirals():
    P = connection_matrix(_rank_one(1 + 0.5j))
    res = pole_scan(P, grid=32)
    assert res.all_in_registry
    assert len(res.detected.base_points) >= 1


def test_pole_scan_rejects_thin_annulus():
    P = connection_matrix(_rank_one(1 + 0.5j))
    with pytest.raises(ValueError):
        pole_scan(P, annulus=(1.0, 1.5))


def test_probes_avoid_registry():
    P = connection_matrix(_two_by_two())
    zs = admissible_probes(P, 30, np.random.default_rng(0))
    assert np.all((np.abs(zs) >= 1.0) & (np.abs(zs) <= abs(P.ctx.q)))
    for z in zs:
        assert not any(near_spiral(P.ctx, z, a, 1e-3) for a in P.registry.base_points)
