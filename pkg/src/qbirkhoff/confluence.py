"""Confluence ``q = q0**eps -> 1`` of connection matrices to ODE monodromy.

A family is given by Fuchsian data ``calA(z) = calA0/z + sum_j calA_j/(z - a_j)``.
Its limiting differential system is ``z dY/dz = Ã(z) Y`` with
``Ã(z) = z calA(z)``; for each ``eps`` a q-difference system with ``q = q0**eps``
is built by one of two discretizations:

* ``"delta"``: ``Y(qz) = (I + (q-1) Ã(z)) Y(z)``;
* ``"sigma_p"``: ``Y(z/q) = (I + (1/q - 1) Ã(z)) Y(z)``.

The differential side is computed independently: Frobenius series at 0 and
infinity, continued by adaptive numerical integration.
"""

from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .birkhoff import connection_matrix
from .errors import (
    HypothesisViolation,
    NoConvergence,
    NumericalFailure,
    OnSpiralRay,
    PathTooCloseToSingularity,
    ResonantExponents,
    UnsupportedSpiralGeometry,
)
from .linalg import RationalMatrix, as_cmatrix, fuchsian_form
from .qsystem import RationalQSystem, analyze_sigma_p, analyze_system
from .theta import QContext

DEFAULT_EPS_GRID = tuple(2.0 ** -k for k in range(1, 8))
HYP_NONRES = "exponents of the limiting system at 0 and infinity are non-resonant"
HYP_DISTINCT = "-1 and the limit poles are pairwise distinct modulo q0^R"


@dataclass(frozen=True, eq=False)
class ConfluenceFamily:
    """Fuchsian data of the limiting system plus the discretization scheme."""

    calA0: np.ndarray
    poles: tuple
    residues: tuple
    q0: complex = 2.0
    scheme: str = "sigma_p"

    def __post_init__(self):
        object.__setattr__(self, "calA0", as_cmatrix(self.calA0, "calA0"))
        object.__setattr__(self, "poles", tuple(complex(a) for a in self.poles))
        object.__setattr__(self, "residues", tuple(as_cmatrix(r, "residue") for r in self.residues))
        if len(self.poles) != len(self.residues):
            raise ValueError("poles and residues must have the same length")
        if self.scheme not in ("sigma_p", "delta"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if any(abs(a) == 0 for a in self.poles):
            raise ValueError("limit poles must lie in C*")

    @property
    def nu(self) -> int:
        return self.calA0.shape[0]

    @cached_property
    def tildeA(self) -> RationalMatrix:
        """``Ã(z) = z calA(z)`` as a rational matrix."""
        return fuchsian_form(self.calA0, self.poles, self.residues)

    @property
    def tildeA0(self) -> np.ndarray:
        return self.calA0

    @property
    def tildeAInf(self) -> np.ndarray:
        return self.calA0 + sum(self.residues, np.zeros_like(self.calA0))

    def tildeA_eval(self, z: complex) -> np.ndarray:
        z = complex(z)
        out = self.calA0.copy()
        for a, r in zip(self.poles, self.residues):
            out = out + z * r / (z - a)
        return out

    @property
    def real_q0(self) -> bool:
        q0 = complex(self.q0)
        return abs(q0.imag) <= 1e-15 * abs(q0) and q0.real > 1


def check_nonresonant(M: np.ndarray, label: str, tol: float = 1e-9) -> None:
    ev = np.linalg.eigvals(M)
    for i in range(len(ev)):
        for j in range(len(ev)):
            d = ev[i] - ev[j]
            k = round(d.real)
            if k != 0 and abs(d - k) <= tol:
                raise ResonantExponents(
                    f"eigenvalues of {label} differ by the integer {k}", HYP_NONRES
                )


def to_qsystem(fam: ConfluenceFamily, eps: float) -> RationalQSystem:
    ctx = QContext(fam.q0, float(eps))
    ctx.check_usable()
    I = RationalMatrix.identity(fam.nu)
    if fam.scheme == "delta":
        return analyze_system(ctx, 1.0, I + fam.tildeA.scale(ctx.q - 1), name=f"delta eps={eps:g}")
    return analyze_sigma_p(ctx, 1.0, I + fam.tildeA.scale(ctx.p - 1), name=f"sigma_p eps={eps:g}")


# -- Frobenius solutions ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FrobeniusSolution:
    """``H(z) z^E`` with ``H = sum_k H_k z^{±k}``, ``H_0 = I``."""

    side: str
    coeffs: np.ndarray
    exponent: np.ndarray
    radius: float
    fam: ConfluenceFamily

    def H(self, z) -> np.ndarray:
        z = complex(z)
        w = z if self.side == "origin" else 1 / z
        out = np.zeros_like(self.coeffs[0])
        for c in self.coeffs[::-1]:
            out = out * w + c
        return out

    def zpow(self, z, log_z: complex | None = None) -> np.ndarray:
        lz = cmath.log(complex(z)) if log_z is None else log_z
        return expm(self.exponent * lz)

    def in_disc(self, z) -> bool:
        z = complex(z)
        slack = 1e-12 * max(1.0, abs(z))
        return abs(z) <= self.radius + slack if self.side == "origin" else abs(z) >= self.radius - slack

    def __call__(self, z, log_z: complex | None = None) -> np.ndarray:
        if not self.in_disc(z):
            raise NumericalFailure(f"z = {complex(z):.6g} is outside the Frobenius disc")
        return self.H(z) @ self.zpow(z, log_z)

    def recursion_residual(self) -> float:
        """Max relative residual of the coefficient recursion."""
        K = len(self.coeffs) - 1
        T = _taylor(self.fam, self.side, K)
        E = self.exponent
        sgn = 1 if self.side == "origin" else -1
        worst = 0.0
        for k in range(1, K + 1):
            H = self.coeffs[k]
            lhs = sgn * k * H + H @ E - E @ H
            rhs = sum(T[j] @ self.coeffs[k - j] for j in range(1, k + 1))
            worst = max(worst, float(np.linalg.norm(lhs - rhs)) / max(1.0, float(np.linalg.norm(rhs))))
        return worst


def _taylor(fam: ConfluenceFamily, side: str, order: int) -> np.ndarray:
    return fam.tildeA.taylor0(order) if side == "origin" else fam.tildeA.taylor_inf(order)


def frobenius_series(
    fam: ConfluenceFamily, side: str = "origin", tol: float = 1e-15, max_terms: int = 400
) -> FrobeniusSolution:
    """Coefficients of ``H`` from ``±k H_k + H_k E - E H_k = sum_{j>=1} Ã_j H_{k-j}``.

    The series is truncated on a disc of half the distance to the nearest
    singularity, once three consecutive terms fall below ``tol``.
    """
    E = fam.tildeA0 if side == "origin" else fam.tildeAInf
    check_nonresonant(E, "the exponent at " + side)
    n = fam.nu
    mods = [abs(a) for a in fam.poles]
    if not mods:
        # constant coefficient: H = I on all of C*
        return FrobeniusSolution(side, np.eye(n, dtype=complex)[None], E, math.inf if side == "origin" else 0.0, fam)
    if side == "origin":
        radius = 0.5 * min(mods)
    else:
        radius = 2.0 * max(mods)
    w = radius if side == "origin" else 1 / radius
    sgn = 1 if side == "origin" else -1
    T = _taylor(fam, side, max_terms)
    H = [np.eye(n, dtype=complex)]
    small = 0
    for k in range(1, max_terms + 1):
        rhs = sum(T[j] @ H[k - j] for j in range(1, k + 1))
        # X (sgn k I + E) - E X = rhs
        lhs = np.kron((sgn * k * np.eye(n) + E).T, np.eye(n)) - np.kron(np.eye(n), E)
        Hk = np.linalg.solve(lhs, rhs.reshape(-1, order="F")).reshape((n, n), order="F")
        H.append(Hk)
        small = small + 1 if np.linalg.norm(Hk) * w ** k < tol else 0
        if small >= 3:
            return FrobeniusSolution(side, np.array(H), E, radius, fam)
    raise NoConvergence(f"Frobenius series at {side} did not converge in {max_terms} terms")


# -- integration --------------------------------------------------------------


def _segment_distance(a: complex, b: complex, s: complex) -> float:
    d = b - a
    if d == 0:
        return abs(s - a)
    u = ((s - a) * d.conjugate()).real / abs(d) ** 2
    u = min(1.0, max(0.0, u))
    return abs(a + u * d - s)


def transport(
    fam: ConfluenceFamily,
    Y: np.ndarray,
    path: Sequence[complex],
    clearance: float = 1e-3,
    rtol: float = 1e-12,
    atol: float = 1e-14,
) -> np.ndarray:
    """Integrate ``z dY/dz = Ã(z) Y`` along a polygonal path."""
    path = [complex(z) for z in path]
    sing = [0.0] + list(fam.poles)
    for a, b in zip(path[:-1], path[1:]):
        for s in sing:
            if _segment_distance(a, b, s) < clearance:
                raise PathTooCloseToSingularity(
                    f"segment {a:.6g} -> {b:.6g} passes within {clearance:g} of {s:.6g}"
                )
    n = fam.nu
    y = np.asarray(Y, dtype=complex).reshape(-1)
    for a, b in zip(path[:-1], path[1:]):
        d = b - a

        def rhs(s, v, a=a, d=d):
            z = a + s * d
            return ((fam.tildeA_eval(z) @ v.reshape(n, -1)) * (d / z)).reshape(-1)

        sol = solve_ivp(rhs, (0.0, 1.0), y, method="DOP853", rtol=rtol, atol=atol)
        if not sol.success:
            raise NumericalFailure(f"integration failed: {sol.message}")
        y = sol.y[:, -1]
    return y.reshape(np.shape(Y))


def circle_path(center: complex, radius: float, start_angle: float, n: int = 64) -> list[complex]:
    """Closed positive polygon approximating a circle (fine enough for the integrator)."""
    return [center + radius * cmath.exp(1j * (start_angle + 2 * math.pi * k / n)) for k in range(n + 1)]


def _arc_transport(fam, Y, center, radius, start_angle, rtol=1e-12, atol=1e-14):
    n = fam.nu

    def rhs(phi, v):
        e = cmath.exp(1j * phi)
        z = center + radius * e
        return ((fam.tildeA_eval(z) @ v.reshape(n, -1)) * (1j * radius * e / z)).reshape(-1)

    sol = solve_ivp(
        rhs, (start_angle, start_angle + 2 * math.pi), np.asarray(Y, dtype=complex).reshape(-1),
        method="DOP853", rtol=rtol, atol=atol,
    )
    if not sol.success:
        raise NumericalFailure(f"integration failed: {sol.message}")
    return sol.y[:, -1].reshape(np.shape(Y))


def eval_ode_solution(
    frob: FrobeniusSolution, z: complex, path: Sequence[complex] | None = None, clearance: float = 1e-3
) -> np.ndarray:
    """Continue ``H z^E`` from the Frobenius disc to ``z``.

    Without ``path`` the radial segment through ``z`` is used and the branch of
    ``z^E`` is the principal one. With ``path`` the branch is fixed at
    ``path[0]`` (principal there) and continued along the path.
    """
    z = complex(z)
    if path is None:
        if frob.in_disc(z):
            return frob(z)
        start = z / abs(z) * frob.radius
        path = [start, z]
    path = [complex(p) for p in path]
    Y = frob(path[0])
    return transport(frob.fam, Y, path, clearance)


# -- monodromy oracle ---------------------------------------------------------


def _loop_radius(fam: ConfluenceFamily, j: int) -> float:
    a = fam.poles[j]
    others = [abs(a)] + [abs(a - b) for i, b in enumerate(fam.poles) if i != j]
    return 0.4 * min(others)


def ode_monodromy_oracle(fam: ConfluenceFamily, j: int | None, base_point: complex | None = None) -> np.ndarray:
    """Monodromy of ``Ỹ0`` around ``fam.poles[j]`` (positive loop).

    The base point defaults to the point of the loop closest to the origin, so
    that the basis ``Ỹ0`` there is the one continued radially from 0. With
    ``j=None`` a loop around a regular point next to 1 is used (expected: I).
    """
    frob = frobenius_series(fam, "origin")
    if j is None:
        r = frob.radius if math.isfinite(frob.radius) else 1.0
        center = complex(r) * 1.5 * cmath.exp(0.123j)
        if fam.poles:
            dmin = min(abs(center - a) for a in fam.poles)
        else:
            dmin = abs(center)
        rho = 0.4 * min(dmin, abs(center))
    else:
        center = fam.poles[j]
        rho = _loop_radius(fam, j)
    if base_point is None:
        base_point = center * (1 - rho / abs(center))
    base_point = complex(base_point)
    if abs(abs(base_point - center) - rho) > 1e-12 * max(1.0, rho):
        raise ValueError("base point must lie on the loop")
    Yb = eval_ode_solution(frob, base_point)
    start = cmath.phase(base_point - center)
    T = _arc_transport(fam, np.eye(fam.nu, dtype=complex), center, rho, start)
    return np.linalg.solve(Yb, T @ Yb)


def monodromy_det_residual(fam: ConfluenceFamily, j: int, M: np.ndarray) -> float:
    """``|det M - exp(2πi tr Res)| / |exp(2πi tr Res)|``."""
    expected = cmath.exp(2j * math.pi * np.trace(fam.residues[j]))
    return abs(np.linalg.det(M) - expected) / abs(expected)


# -- sectors ------------------------------------------------------------------


def _angle(z: complex) -> float:
    """Argument in ``[π, 3π)``."""
    a = cmath.phase(complex(z)) % (2 * math.pi)
    return a + 2 * math.pi if a < math.pi else a


@dataclass(frozen=True)
class SectorPartition:
    phi: tuple  # phi[k] = index of the ray at position k; 0 and m+1 denote -1
    ray_angles: tuple  # angles of the rays in sorted order, in [π, 3π], ends included
    guardAngles: float = 1e-6

    @property
    def m(self) -> int:
        return len(self.phi) - 2

    def sector_bounds(self, j: int) -> tuple[float, float]:
        return self.ray_angles[j], self.ray_angles[j + 1]


def sector_partition(fam: ConfluenceFamily, guard: float = 1e-6) -> SectorPartition:
    if not fam.real_q0:
        raise UnsupportedSpiralGeometry(
            "sector classification needs a real q0 > 1 (spirals are then rays)"
        )
    angs = [_angle(a) for a in fam.poles]
    for i, x in enumerate(angs):
        if abs(x - math.pi) <= guard or abs(x - 3 * math.pi) <= guard:
            raise HypothesisViolation(f"pole {fam.poles[i]:.6g} lies on the ray of -1", HYP_DISTINCT)
        for k in range(i):
            if abs(x - angs[k]) <= guard:
                raise HypothesisViolation(
                    f"poles {fam.poles[k]:.6g} and {fam.poles[i]:.6g} share a ray", HYP_DISTINCT
                )
    order = sorted(range(len(angs)), key=lambda i: angs[i])
    m = len(angs)
    phi = (0,) + tuple(i + 1 for i in order) + (m + 1,)
    rays = (math.pi,) + tuple(angs[i] for i in order) + (3 * math.pi,)
    return SectorPartition(phi, rays, guard)


def sector_index(part: SectorPartition, z: complex) -> int:
    z = complex(z)
    if z == 0:
        raise OnSpiralRay("z = 0 is on every ray")
    a = _angle(z)
    for r in part.ray_angles:
        if abs(a - r) <= part.guardAngles:
            raise OnSpiralRay(f"z = {z:.6g} lies on a spiral ray (angle {r:.6g})")
    for j in range(len(part.ray_angles) - 1):
        lo, hi = part.sector_bounds(j)
        if lo < a < hi:
            return j
    raise OnSpiralRay(f"z = {z:.6g} could not be classified")


def sector_midpoints(part: SectorPartition, radius: float = 1.0) -> list[complex]:
    return [
        radius * cmath.exp(1j * 0.5 * (lo + hi))
        for lo, hi in (part.sector_bounds(j) for j in range(part.m + 1))
    ]


def ode_connection(fam: ConfluenceFamily, z: complex) -> np.ndarray:
    """``Ỹ∞(z)^{-1} Ỹ0(z)`` by radial continuation from both Frobenius discs."""
    Y0 = eval_ode_solution(frobenius_series(fam, "origin"), z)
    Yi = eval_ode_solution(frobenius_series(fam, "infinity"), z)
    return np.linalg.solve(Yi, Y0)


# -- eps sweep ----------------------------------------------------------------


@dataclass
class ProbeTrace:
    z: complex
    sector: int | None
    values: list  # per eps: matrix or None
    errors: list  # per eps: message or None

    @property
    def increments(self) -> list[float]:
        out = []
        for a, b in zip(self.values[:-1], self.values[1:]):
            out.append(math.nan if a is None or b is None else float(np.linalg.norm(b - a)))
        return out

    @property
    def limit(self) -> np.ndarray | None:
        return self.values[-1]

    @property
    def error_bar(self) -> float:
        inc = self.increments
        return inc[-1] if inc else 0.0

    def decreasing_from(self, k0: int = 1) -> bool:
        inc = self.increments[k0:]
        if any(math.isnan(x) for x in inc):
            return False
        return all(b < a for a, b in zip(inc[:-1], inc[1:]))


@dataclass
class ConfluenceReport:
    epsGrid: tuple
    probes: list  # ProbeTrace
    partition: SectorPartition | None
    tildePj: dict = field(default_factory=dict)  # sector -> (matrix, error bar)
    representative: dict = field(default_factory=dict)  # sector -> ProbeTrace
    odeMonodromy: dict = field(default_factory=dict)  # position j -> matrix
    residuals: dict = field(default_factory=dict)

    def sector_consistency(self) -> dict:
        """Per sector: max over probe pairs of ``||P_a - P_b|| / (bar_a + bar_b)``."""
        out = {}
        by = {}
        for p in self.probes:
            if p.sector is not None and p.limit is not None:
                by.setdefault(p.sector, []).append(p)
        for s, ps in by.items():
            worst = 0.0
            for i in range(len(ps)):
                for k in range(i):
                    d = float(np.linalg.norm(ps[i].limit - ps[k].limit))
                    worst = max(worst, d / max(ps[i].error_bar + ps[k].error_bar, 1e-300))
            out[s] = worst
        return out


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("QBIRKHOFF_THREADS", "1")))
    except ValueError:
        return 1


def _eval_at_eps(fam: ConfluenceFamily, eps: float, probes: Sequence[complex]):
    try:
        P = connection_matrix(to_qsystem(fam, eps))
    except (NumericalFailure, HypothesisViolation) as e:
        return [(None, f"{type(e).__name__}: {e}") for _ in probes]
    out = []
    for z in probes:
        try:
            out.append((P(z), None))
        except NumericalFailure as e:
            out.append((None, f"{type(e).__name__}: {e}"))
    return out


def epsilon_sweep(
    fam: ConfluenceFamily,
    probes: Sequence[complex],
    eps_grid: Sequence[float] = DEFAULT_EPS_GRID,
    guard: float = 1e-6,
) -> ConfluenceReport:
    """``P(z, eps)`` on the grid at every probe; failures are recorded per point."""
    eps_grid = tuple(float(e) for e in eps_grid)
    if any(b >= a for a, b in zip(eps_grid[:-1], eps_grid[1:])):
        raise ValueError("eps grid must be strictly decreasing")
    probes = [complex(z) for z in probes]
    try:
        part = sector_partition(fam, guard)
    except UnsupportedSpiralGeometry:
        part = None
    sectors, ok = [], []
    for z in probes:
        if part is None:
            sectors.append(None)
            ok.append(True)
            continue
        try:
            sectors.append(sector_index(part, z))
            ok.append(True)
        except OnSpiralRay:
            sectors.append(None)
            ok.append(False)
    live = [z for z, good in zip(probes, ok) if good]
    nthreads = _threads()
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as ex:
            cols = list(ex.map(lambda e: _eval_at_eps(fam, e, live), eps_grid))
    else:
        cols = [_eval_at_eps(fam, e, live) for e in eps_grid]
    traces, li = [], 0
    for z, s, good in zip(probes, sectors, ok):
        if not good:
            msg = "OnSpiralRay: probe lies on a limit ray"
            traces.append(ProbeTrace(z, None, [None] * len(eps_grid), [msg] * len(eps_grid)))
            continue
        vals = [cols[k][li][0] for k in range(len(eps_grid))]
        errs = [cols[k][li][1] for k in range(len(eps_grid))]
        traces.append(ProbeTrace(z, s, vals, errs))
        li += 1
    rep = ConfluenceReport(eps_grid, traces, part)
    for p in traces:
        if p.sector is None or p.limit is None or math.isnan(p.error_bar):
            continue
        cur = rep.tildePj.get(p.sector)
        if cur is None or p.error_bar < cur[1]:
            rep.tildePj[p.sector] = (p.limit, p.error_bar)
            rep.representative[p.sector] = p
    return rep


def sector_monodromy_check(report: ConfluenceReport, fam: ConfluenceFamily, j: int) -> tuple[float, float]:
    """Residual of ``P̃_j^{-1} P̃_{j-1}`` against the ODE monodromy around the
    ``j``-th ray (``1 <= j <= m``), and the last eps-increment of that product
    relative to the monodromy (its limit error bar).
    """
    part = report.partition
    if part is None:
        raise UnsupportedSpiralGeometry("no sector partition available")
    if j not in report.odeMonodromy:
        report.odeMonodromy[j] = ode_monodromy_oracle(fam, part.phi[j] - 1)
    M = report.odeMonodromy[j]
    if j not in report.tildePj or (j - 1) not in report.tildePj:
        return math.nan, math.nan
    tj, tk = report.representative[j], report.representative[j - 1]
    est = np.linalg.solve(tj.limit, tk.limit)
    res = float(np.linalg.norm(est - M) / np.linalg.norm(M))
    # error bar of the product itself: its last increment on the eps grid
    prev = (tj.values[-2], tk.values[-2]) if len(tj.values) > 1 else (None, None)
    if prev[0] is None or prev[1] is None:
        bar = math.nan
    else:
        bar = float(np.linalg.norm(est - np.linalg.solve(prev[0], prev[1])) / np.linalg.norm(M))
    report.residuals[f"sector_monodromy_j{j}"] = res
    return res, bar


def global_monodromy_residual(report: ConfluenceReport, fam: ConfluenceFamily) -> float:
    """Relation across the ray of -1: ``exp(2πi Ã∞) P̃_m = P̃_0 exp(2πi Ã0)``."""
    part = report.partition
    if part is None or 0 not in report.tildePj or part.m not in report.tildePj:
        return math.nan
    E0 = expm(2j * math.pi * fam.tildeA0)
    Ei = expm(2j * math.pi * fam.tildeAInf)
    lhs = Ei @ report.tildePj[part.m][0]
    rhs = report.tildePj[0][0] @ E0
    res = float(np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs))
    report.residuals["global_monodromy"] = res
    return res


__all__ = [
    "ConfluenceFamily",
    "ConfluenceReport",
    "DEFAULT_EPS_GRID",
    "FrobeniusSolution",
    "ProbeTrace",
    "SectorPartition",
    "epsilon_sweep",
    "eval_ode_solution",
    "frobenius_series",
    "global_monodromy_residual",
    "monodromy_det_residual",
    "ode_connection",
    "ode_monodromy_oracle",
    "sector_index",
    "sector_midpoints",
    "sector_monodromy_check",
    "sector_partition",
    "to_qsystem",
    "transport",
]
