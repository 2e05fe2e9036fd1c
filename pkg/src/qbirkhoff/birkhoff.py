"""Birkhoff connection matrix ``P = Y_∞^{-1} Y_0`` and its probes."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import minimize

from .errors import IllConditionedInversion, NumericalFailure, OnPoleSpiral
from .qsystem import LocalSolution, RationalQSystem, local_series
from .theta import SpiralSet, near_spiral, spiral_coordinate

COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class ConnectionMatrix:
    system: RationalQSystem
    sol0: LocalSolution
    solInf: LocalSolution
    last_cond: list = field(default_factory=list, repr=False)

    @property
    def ctx(self):
        return self.system.ctx

    @cached_property
    def registry(self) -> SpiralSet:
        pts = self.sol0.pole_bases() + self.solInf.pole_bases()
        return SpiralSet(tuple(pts), self.ctx).canonical()

    def eval_scaled(self, z, ptol: float | None = None) -> tuple[np.ndarray, complex]:
        """``(Pmat, s)`` with ``P(z) = Pmat * exp(s)``."""
        Y0, s0 = self.sol0.eval_scaled(z, ptol)
        Yi, si = self.solInf.eval_scaled(z, ptol)
        cond = float(np.linalg.cond(Yi))
        self.last_cond[:] = [cond]
        if not math.isfinite(cond) or cond > COND_LIMIT:
            raise IllConditionedInversion(
                f"Y_inf is ill-conditioned at z = {complex(z):.6g} (cond {cond:.2e})"
            )
        return np.linalg.solve(Yi, Y0), s0 - si

    def __call__(self, z, ptol: float | None = None) -> np.ndarray:
        P, s = self.eval_scaled(z, ptol)
        return P * cmath.exp(s)


def connection_matrix(sys: RationalQSystem, tol: float = 1e-14) -> ConnectionMatrix:
    return ConnectionMatrix(sys, local_series(sys, "origin", tol), local_series(sys, "infinity", tol))


def connection_eval(P: ConnectionMatrix, z, ptol: float | None = None) -> np.ndarray:
    return P(z, ptol)


def annulus_samples(
    rng: np.random.Generator, n: int, rmin: float, rmax: float
) -> np.ndarray:
    """Log-uniform radius, uniform angle."""
    r = np.exp(rng.uniform(math.log(rmin), math.log(rmax), n))
    th = rng.uniform(-math.pi, math.pi, n)
    return r * np.exp(1j * th)


def admissible_probes(
    P: ConnectionMatrix,
    n: int,
    rng: np.random.Generator,
    rmin: float = 1.0,
    guard: float = 1e-3,
    extra_bases=(),
) -> np.ndarray:
    """``n`` points of one fundamental annulus away from the registry spirals.

    ``guard`` is a distance in spiral coordinates.
    """
    q = abs(P.ctx.q)
    out: list[complex] = []
    bases = list(P.registry.base_points) + [complex(b) for b in extra_bases]
    tries = 0
    while len(out) < n:
        tries += 1
        if tries > 1000 * n:
            raise NumericalFailure("could not find admissible sample points")
        z = complex(annulus_samples(rng, 1, rmin, rmin * q)[0])
        if any(near_spiral(P.ctx, z, a, guard) for a in bases):
            continue
        out.append(z)
    return np.array(out)


def ellipticity_residual(
    P: ConnectionMatrix,
    samples: int = 200,
    seed: int = 0,
    rmin: float = 1.0,
    guard: float = 1e-3,
) -> float:
    """Max of ``||P(qz) - P(z)|| / ||P(z)||`` over sampled admissible points.

    Points whose evaluation fails numerically are skipped and resampled.
    """
    rng = np.random.default_rng(seed)
    q = P.ctx.q
    worst = 0.0
    done = 0
    attempts = 0
    while done < samples:
        attempts += 1
        if attempts > 20 * samples:
            raise NumericalFailure("too many failed ellipticity samples")
        z = complex(admissible_probes(P, 1, rng, rmin, guard)[0])
        try:
            P1, s1 = P.eval_scaled(z)
            P2, s2 = P.eval_scaled(q * z)
        except (NumericalFailure, OnPoleSpiral):
            continue
        P2 = P2 * cmath.exp(s2 - s1)
        worst = max(worst, float(np.linalg.norm(P2 - P1) / np.linalg.norm(P1)))
        done += 1
    return worst


@dataclass(frozen=True)
class PoleScanResult:
    detected: SpiralSet
    points: tuple
    unmatched: tuple
    median_norm: float

    @property
    def all_in_registry(self) -> bool:
        return len(self.unmatched) == 0


def _log_norm(P: ConnectionMatrix, z: complex) -> float:
    """``log max|P_ij(z)|``; exactly singular points are nudged by 1e-8."""
    for k in range(4):
        zz = z if k == 0 else z * (1 + 1e-8 * cmath.exp(2j * math.pi * k / 3))
        try:
            M, s = P.eval_scaled(zz, ptol=1e-13)
        except NumericalFailure:
            continue
        return math.log(max(float(np.max(np.abs(M))), 1e-300)) + s.real
    return math.nan


def _capped(v: float, fallback: float) -> float:
    return fallback if math.isnan(v) else min(v, 700.0)


def pole_scan(
    P: ConnectionMatrix,
    annulus: tuple[float, float] | None = None,
    grid: int = 48,
    threshold: float = 1e6,
    spiral_tol: float = 1e-6,
) -> PoleScanResult:
    """Locate blow-up loci of ``P`` in an annulus and group them into spirals.

    A coarse polar grid gives candidate local maxima of ``log max|P_ij|``;
    each candidate is refined by Nelder-Mead in ``(log r, angle)``. A point
    counts as a pole when the refined value exceeds ``threshold`` times the
    median grid value.
    """
    ctx = P.ctx
    q = abs(ctx.q)
    rmin, rmax = annulus if annulus is not None else (1.0, q)
    if rmax / rmin < q * (1 - 1e-12):
        raise ValueError("annulus must cover a fundamental domain (rmax/rmin >= |q|)")
    lr = np.linspace(math.log(rmin), math.log(rmax), grid)
    th = np.linspace(-math.pi, math.pi, 2 * grid, endpoint=False)
    vals = np.empty((len(lr), len(th)))
    for i, a in enumerate(lr):
        for j, b in enumerate(th):
            vals[i, j] = _log_norm(P, cmath.exp(a + 1j * b))
    finite = vals[np.isfinite(vals)]
    med = float(np.median(finite)) if finite.size else 0.0
    log_thr = med + math.log(threshold)

    cands = []
    for i in range(len(lr)):
        for j in range(len(th)):
            v = vals[i, j]
            if not math.isfinite(v):
                continue
            nb = [
                vals[ii, (j + dj) % len(th)]
                for ii in (i - 1, i, i + 1)
                for dj in (-1, 0, 1)
                if 0 <= ii < len(lr) and not (ii == i and dj == 0)
            ]
            if all(not (x > v) for x in nb if math.isfinite(x)):
                if v > med + math.log(10.0):
                    cands.append((lr[i], th[j]))

    found: list[complex] = []
    for a, b in cands:
        res = minimize(
            lambda x: -_capped(_log_norm(P, cmath.exp(x[0] + 1j * x[1])), med),
            np.array([a, b]),
            method="Nelder-Mead",
            options={"xatol": 1e-13, "fatol": 1e-12, "maxiter": 2000},
        )
        if -res.fun >= log_thr:
            found.append(cmath.exp(res.x[0] + 1j * res.x[1]))

    bases: list[complex] = []
    for z in found:
        if not any(abs(spiral_coordinate(ctx, z, b)[1]) <= 1e-4 for b in bases):
            bases.append(z)
    detected = SpiralSet(tuple(bases), ctx, spiral_tol) if bases else SpiralSet((), ctx)
    unmatched = tuple(
        z for z in bases
        if not any(abs(spiral_coordinate(ctx, z, a)[1]) <= spiral_tol for a in P.registry.base_points)
    )
    return PoleScanResult(detected, tuple(found), unmatched, math.exp(med))


__all__ = [
    "ConnectionMatrix",
    "PoleScanResult",
    "admissible_probes",
    "annulus_samples",
    "connection_eval",
    "connection_matrix",
    "ellipticity_residual",
    "pole_scan",
]
