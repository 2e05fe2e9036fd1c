"""Parameter families of q-systems and connection-preserving deformations.

A family is a pure map ``t -> RationalQSystem``. The deformation matrix is
``B(z,t) = Y(z,qt) Y(z,t)^{-1}`` computed from either local solution; the
family is pseudo-constant when ``P(z,qt) = P(z,t)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .birkhoff import ConnectionMatrix, connection_matrix
from .errors import DegenerateFit, HypothesisViolation, NumericalFailure
from .linalg import RationalFunction
from .qsystem import RationalQSystem

HYP_T_INDEP = "A0 and A_inf do not depend on t"
HYP_R_RATIO = "r0(qt) in r0(t) q^Z and r_inf(qt) in r_inf(t) q^Z"
HYP_POLES = "each pole of A is proportional to t or independent of t"
HYP_VALUATION = "valuation and degree of R do not depend on t"


def _in_q_lattice(ctx, ratio: complex, tol: float) -> bool:
    x = cmath.log(ratio) / ctx.logQ
    n = round(x.real)
    return abs(ratio - cmath.exp(n * ctx.logQ)) <= tol * max(1.0, abs(ratio))


@dataclass(frozen=True)
class PoleClass:
    point: complex
    kind: str  # "proportional" | "constant"


@dataclass(eq=False)
class DeformationFamily:
    """``t -> system`` with the standing hypotheses checked on ``t_samples``.

    ``t_samples`` stands in for the parameter domain: each sample ``t`` must
    admit both ``t`` and ``qt``.
    """

    builder: Callable[[complex], RationalQSystem]
    t_samples: Sequence[complex]
    strict: bool = True
    tol: float = 1e-10
    pole_classes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t_samples = tuple(complex(t) for t in self.t_samples)
        self._systems: dict = {}
        self._conn: dict = {}
        for t in self.t_samples:
            self._validate(t)

    def system(self, t: complex) -> RationalQSystem:
        key = complex(t)
        if key not in self._systems:
            self._systems[key] = self.builder(key)
        return self._systems[key]

    def connection(self, t: complex) -> ConnectionMatrix:
        key = complex(t)
        if key not in self._conn:
            self._conn[key] = connection_matrix(self.system(key))
        return self._conn[key]

    def q(self, t: complex) -> complex:
        return self.system(t).q

    @property
    def m1(self) -> int:
        return sum(
            1 for cl in self.pole_classes.values() for c in cl if c.kind == "proportional"
        )

    def _validate(self, t: complex) -> None:
        s0 = self.system(t)
        s1 = self.system(s0.q * t)
        ctx = s0.ctx
        if s0.mu0 != s1.mu0 or s0.muInf != s1.muInf:
            raise HypothesisViolation(
                f"valuation/degree of R changes between t={t:.6g} and qt", HYP_VALUATION
            )
        for name, a, b in (("A0", s0.A0, s1.A0), ("A_inf", s0.AInf, s1.AInf)):
            if np.linalg.norm(a - b) > 1e-12 * max(1.0, np.linalg.norm(a)):
                raise HypothesisViolation(f"{name} differs between t and qt", HYP_T_INDEP)
        for name, a, b in (("r0", s0.r0, s1.r0), ("r_inf", s0.rInf, s1.rInf)):
            if not _in_q_lattice(ctx, b / a, self.tol):
                raise HypothesisViolation(
                    f"{name}(qt)/{name}(t) = {b / a:.6g} is not a power of q", HYP_R_RATIO
                )
        classes = []
        for a in s0.S0:
            if any(abs(b - s0.q * a) <= 1e-6 * max(1.0, abs(b)) for b in s1.S0):
                classes.append(PoleClass(complex(a), "proportional"))
            elif any(abs(b - a) <= 1e-6 * max(1.0, abs(b)) for b in s1.S0):
                classes.append(PoleClass(complex(a), "constant"))
            elif self.strict:
                raise HypothesisViolation(
                    f"pole {a:.6g} is neither proportional to t nor constant", HYP_POLES
                )
        self.pole_classes[t] = tuple(classes)

    def proportional_poles(self, t: complex) -> list[complex]:
        if t not in self.pole_classes:
            self._validate(t)
        return [c.point for c in self.pole_classes[t] if c.kind == "proportional"]


def deformation_matrix_eval(
    fam: DeformationFamily, t: complex, z: complex, side: str = "origin"
) -> np.ndarray:
    """``Y(z,qt) Y(z,t)^{-1}`` from the chosen local solution."""
    t = complex(t)
    c0, c1 = fam.connection(t), fam.connection(fam.q(t) * t)
    s_a, s_b = (c0.sol0, c1.sol0) if side == "origin" else (c0.solInf, c1.solInf)
    Y0, e0 = s_a.eval_scaled(z)
    Y1, e1 = s_b.eval_scaled(z)
    return np.linalg.solve(Y0.T, Y1.T).T * cmath.exp(e1 - e0)


@dataclass(frozen=True)
class PseudoConstancy:
    pseudoConstant: bool
    maxResidual: float


def pseudo_constancy_test(
    fam: DeformationFamily, t: complex, z_grid, tol: float = 1e-8
) -> PseudoConstancy:
    t = complex(t)
    c0, c1 = fam.connection(t), fam.connection(fam.q(t) * t)
    worst = 0.0
    for z in np.asarray(z_grid, dtype=complex).ravel():
        P0, s0 = c0.eval_scaled(z)
        P1, s1 = c1.eval_scaled(z)
        P1 = P1 * cmath.exp(s1 - s0)
        worst = max(worst, float(np.linalg.norm(P1 - P0) / np.linalg.norm(P0)))
    return PseudoConstancy(worst <= tol, worst)


def lax_residual(fam: DeformationFamily, t: complex, B: Callable, z_grid) -> float:
    """``max ||M(z,qt) B(z,t) - B(qz,t) M(z,t)||`` normalized by the left side."""
    t = complex(t)
    s0 = fam.system(t)
    s1 = fam.system(s0.q * t)
    worst = 0.0
    for z in np.asarray(z_grid, dtype=complex).ravel():
        lhs = s1.M(np.array([z]))[0] @ np.atleast_2d(B(z))
        rhs = np.atleast_2d(B(s0.q * z)) @ s0.M(np.array([z]))[0]
        worst = max(worst, float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(lhs), 1e-300)))
    return worst


# -- rationality --------------------------------------------------------------


@dataclass(frozen=True)
class RationalFit:
    isRational: bool
    fit: tuple  # rows of RationalFunction (None where no fit found)
    degrees: tuple
    error: float

    def poles(self, zero_tol: float = 1e-8) -> np.ndarray:
        pts = []
        for row in self.fit:
            for e in row:
                if e is None:
                    continue
                for r in e.cancel(1e-6).poles():
                    if abs(r) > zero_tol:
                        pts.append(r)
        return np.array(pts, dtype=complex)


def _fit_entry(z, f, zt, ft, bound, rho):
    """Minimal (m, n) with out-of-sample relative error <= 1e-6."""
    scale = max(float(np.max(np.abs(ft))), 1e-300)
    if np.max(np.abs(f)) <= 1e-14 * max(scale, 1.0) and np.max(np.abs(ft)) <= 1e-14:
        return RationalFunction.constant(0.0), (0, 0), 0.0
    x, xt = z / rho, zt / rho
    best = None
    for total in range(0, 2 * bound + 1):
        for n in range(0, min(total, bound) + 1):
            m = total - n
            if m > bound:
                continue
            cols = m + 1 + n + 1
            if len(z) < cols + 2:
                raise DegenerateFit("not enough samples for the requested degree bound")
            V = np.hstack([x[:, None] ** np.arange(m + 1), -f[:, None] * x[:, None] ** np.arange(n + 1)])
            norms = np.linalg.norm(V, axis=0)
            norms[norms == 0] = 1.0
            _, sv, vh = np.linalg.svd(V / norms, full_matrices=False)
            c = vh[-1].conj() / norms
            a, b = c[: m + 1], c[m + 1 :]
            den = np.polynomial.polynomial.polyval(xt, b)
            if np.any(den == 0):
                continue
            pred = np.polynomial.polynomial.polyval(xt, a) / den
            err = float(np.max(np.abs(pred - ft)) / scale)
            if best is None or err < best[2]:
                best = (a, b, err, m, n, sv)
            if err <= 1e-6:
                if len(sv) > 1 and sv[-2] <= 1e-13 * sv[0]:
                    raise DegenerateFit("interpolation system is rank deficient")
                # undo the argument scaling
                pa = a / rho ** np.arange(m + 1)
                pb = b / rho ** np.arange(n + 1)
                return RationalFunction(pa, pb), (m, n), err
    return None, (best[3], best[4]) if best else (-1, -1), best[2] if best else math.inf


def rationality_check(
    B: Callable,
    sample_count: int = 64,
    degree_bound: int = 6,
    seed: int = 0,
    radius: tuple[float, float] = (0.3, 3.0),
) -> RationalFit:
    """Least-squares rational fit of every entry of ``B`` up to ``degree_bound``.

    Samples are log-uniform in an annulus; half are used for fitting and the
    other half for the out-of-sample check.
    """
    rng = np.random.default_rng(seed)
    pts, vals = [], []
    tries = 0
    while len(pts) < 2 * sample_count:
        tries += 1
        if tries > 20 * sample_count:
            raise DegenerateFit("could not evaluate the function at enough sample points")
        r = math.exp(rng.uniform(math.log(radius[0]), math.log(radius[1])))
        z = r * cmath.exp(1j * rng.uniform(-math.pi, math.pi))
        try:
            v = np.atleast_2d(np.asarray(B(z), dtype=complex))
        except NumericalFailure:
            continue
        if not np.all(np.isfinite(v)):
            continue
        pts.append(z)
        vals.append(v)
    pts = np.array(pts)
    vals = np.array(vals)
    nu = vals.shape[1]
    if sample_count < 2 * (degree_bound + 1) * nu * nu:
        raise DegenerateFit("sample count too small for the degree bound")
    rho = math.sqrt(radius[0] * radius[1])
    zf, zt = pts[:sample_count], pts[sample_count:]
    fits, degs, worst, ok = [], [], 0.0, True
    for i in range(nu):
        row, drow = [], []
        for j in range(vals.shape[2]):
            fit, d, err = _fit_entry(zf, vals[:sample_count, i, j], zt, vals[sample_count:, i, j], degree_bound, rho)
            ok &= fit is not None
            worst = max(worst, err)
            row.append(fit)
            drow.append(d)
        fits.append(tuple(row))
        degs.append(tuple(drow))
    return RationalFit(bool(ok), tuple(fits), tuple(degs), worst)


def default_degree_bound(sys: RationalQSystem) -> int:
    return len(sys.S0) + abs(sys.muInf - sys.mu0) + 2


__all__ = [
    "DeformationFamily",
    "PseudoConstancy",
    "RationalFit",
    "default_degree_bound",
    "deformation_matrix_eval",
    "lax_residual",
    "pseudo_constancy_test",
    "rationality_check",
    "HYP_POLES",
    "HYP_R_RATIO",
    "HYP_T_INDEP",
]
