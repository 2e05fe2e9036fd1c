"""Fuchsian linear q-difference systems and their local solutions at 0 and ∞.

A system is ``Y(qz) = M(z) Y(z)``. Two input shapes are accepted:

* product form ``M = R A`` (``R`` scalar rational, ``A`` rational matrix);
* ``σ_p`` form ``Y(z/q) = R_p(z) A_p(z) Y(z)``, normalized on ingestion to
  ``M(z) = (R_p(qz) A_p(qz))^{-1}``.

Local solutions are ``Y_0 = H_0(z) Λ_{q,B_0} Θ_q(z)^{μ_0}`` and
``Y_∞ = H_∞(z) Λ_{q,B_∞} Θ_q(z)^{μ_∞}``, with ``H_0(0) = H_∞(∞) = I``. The
series parts are computed inside a working disc and continued to the rest of
``C*`` by the functional equation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np

from .errors import (
    NoConvergence,
    OnPoleSpiral,
    PoleAtZeroOrInfinity,
    PropagationThroughPole,
    Resonant,
    SingularLeadingMatrix,
)
from .linalg import (
    RationalFunction,
    RationalMatrix,
    as_cmatrix,
    series_inverse,
    sylvester_shifted,
)
from .theta import CharacterPart, QContext, SpiralSet, near_spiral, theta_log

Side = Literal["origin", "infinity"]
MAX_TERMS = 500
DET_TOL = 1e-12


def _points_near(ctx: QContext, z: np.ndarray, pts, tol: float) -> np.ndarray:
    """Mask of ``z`` entries within relative distance ``tol`` of any point."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape, dtype=bool)
    for a in pts:
        out |= np.abs(z - a) <= tol * max(1.0, abs(a))
    return out


@dataclass(frozen=True, eq=False)
class RationalQSystem:
    """``Y(qz) = M(z) Y(z)`` plus its local data at 0 and ∞.

    Build through :func:`analyze_system` or :func:`analyze_sigma_p`.
    ``F`` is the (cancelled) rational matrix such that ``M = F`` in product
    form and ``M(z) = F(qz)^{-1}`` in ``σ_p`` form.
    """

    ctx: QContext
    form: str
    R: RationalFunction
    A: RationalMatrix
    F: RationalMatrix
    mu0: int
    r0: complex
    muInf: int
    rInf: complex
    A0: np.ndarray
    AInf: np.ndarray
    S0: np.ndarray
    SInf: np.ndarray
    resonance_tol: float = 1e-10
    name: str = field(default="")

    @property
    def nu(self) -> int:
        return self.F.nu

    @property
    def q(self) -> complex:
        return self.ctx.q

    @property
    def B0(self) -> np.ndarray:
        return self.r0 * self.A0

    @property
    def BInf(self) -> np.ndarray:
        return self.rInf * self.AInf

    @cached_property
    def _Fq(self) -> RationalMatrix:
        return self.F.scale_argument(self.ctx.q)

    def M(self, z) -> np.ndarray:
        """Coefficient ``M(z)`` (vectorized over ``z``)."""
        if self.form == "sigma_q":
            return self.F(z)
        return np.linalg.inv(self._Fq(z))

    def M_inv(self, z) -> np.ndarray:
        if self.form == "sigma_q":
            return np.linalg.inv(self.F(z))
        return self._Fq(z)

    def M_tilde0(self, order: int) -> np.ndarray:
        """Taylor coefficients of ``z^{-μ0} M(z)`` at 0."""
        if self.form == "sigma_q":
            g, c = self.F.laurent0(order)
            return c
        g, c = self._Fq.laurent0(order)
        return series_inverse(c)

    def N_tildeInf(self, order: int) -> np.ndarray:
        """Coefficients of ``z^{-μ∞} M(z)`` in powers of ``1/z``."""
        if self.form == "sigma_q":
            g, c = self.F.laurent_inf(order)
            return c
        g, c = self._Fq.laurent_inf(order)
        return series_inverse(c)

    @property
    def r0_radius(self) -> float:
        """Working radius of the origin-side series."""
        if len(self.S0) == 0:
            return 1.0
        return 0.5 * abs(self.q) * float(np.min(np.abs(self.S0)))

    @property
    def rInf_radius(self) -> float:
        if len(self.SInf) == 0:
            return 1.0
        return 2.0 * float(np.max(np.abs(self.SInf)))

    def describe(self) -> dict:
        return {
            "form": self.form,
            "nu": self.nu,
            "mu0": self.mu0,
            "muInf": self.muInf,
            "r0": self.r0,
            "rInf": self.rInf,
            "A0": self.A0,
            "AInf": self.AInf,
            "S0": self.S0,
            "SInf": self.SInf,
        }


def _leading(rf: RationalFunction, at_infinity: bool) -> tuple[int, complex]:
    if rf.is_zero:
        raise ValueError("R must not be identically zero")
    if at_infinity:
        g, c = rf.laurent_inf(0)
    else:
        g, c = rf.laurent0(0)
    return g, complex(c[0])


def _matrix_at(A: RationalMatrix, at_infinity: bool) -> np.ndarray:
    try:
        c = A.taylor_inf(0) if at_infinity else A.taylor0(0)
    except PoleAtZeroOrInfinity:
        where = "infinity" if at_infinity else "0"
        raise PoleAtZeroOrInfinity(
            f"A has a pole at z = {where}",
            "A analytic and invertible at 0 and infinity (Fuchsian system)",
        ) from None
    return c[0]


def _check_invertible(m: np.ndarray, label: str) -> None:
    if abs(np.linalg.det(m)) <= DET_TOL:
        raise SingularLeadingMatrix(
            f"{label} is not invertible (|det| <= {DET_TOL})",
            "A analytic and invertible at 0 and infinity (Fuchsian system)",
        )


def check_resonance(ctx: QContext, B: np.ndarray, label: str, tol: float = 1e-10) -> None:
    """Raise :class:`Resonant` if two distinct eigenvalues differ by a factor in q^Z\\{1}."""
    lam = np.linalg.eigvals(B)
    scale = max(1.0, float(np.max(np.abs(lam))))
    for i in range(len(lam)):
        for j in range(len(lam)):
            if i == j or abs(lam[i] - lam[j]) <= 1e-8 * scale:
                continue
            x = cmath.log(lam[i] / lam[j]) / ctx.logQ
            n = round(x.real)
            if n != 0 and abs(lam[i] - lam[j] * cmath.exp(n * ctx.logQ)) <= tol * scale:
                raise Resonant(
                    f"eigenvalues {lam[i]:.6g} and {lam[j]:.6g} of {label} are congruent "
                    f"modulo q^Z (factor q^{n})",
                    "distinct eigenvalues of A0 and A_inf are distinct modulo q^Z",
                )


def _det_zeros(F: RationalMatrix) -> np.ndarray:
    return F.det().cancel().zeros()


def _unique(pts, rtol: float = 1e-7) -> np.ndarray:
    out: list[complex] = []
    for p in np.asarray(pts, dtype=complex).ravel():
        if not any(abs(p - o) <= rtol * max(1.0, abs(o)) for o in out):
            out.append(complex(p))
    return np.array(out, dtype=complex)


def analyze_system(ctx: QContext, R, A, name: str = "") -> RationalQSystem:
    """Product-form system ``Y(qz) = R(z) A(z) Y(z)``."""
    R = R if isinstance(R, RationalFunction) else RationalFunction.constant(R)
    A = A if isinstance(A, RationalMatrix) else RationalMatrix.constant(A)
    mu0, r0 = _leading(R, False)
    muI, rI = _leading(R, True)
    A0, AI = _matrix_at(A, False), _matrix_at(A, True)
    _check_invertible(A0, "A(0)")
    _check_invertible(AI, "A(infinity)")
    F = A.scale(R).cancel()
    S0 = _unique(F.poles())
    SI = _unique(np.concatenate([S0, _det_zeros(F)]))
    sys = RationalQSystem(ctx, "sigma_q", R, A, F, mu0, r0, muI, rI, A0, AI, S0, SI, name=name)
    check_resonance(ctx, sys.B0, "r0*A0")
    check_resonance(ctx, sys.BInf, "r_inf*A_inf")
    return sys


def analyze_sigma_p(ctx: QContext, R_p, A_p, name: str = "") -> RationalQSystem:
    """System given as ``Y(z/q) = R_p(z) A_p(z) Y(z)``.

    Equivalent to ``Y(qz) = (R_p(qz) A_p(qz))^{-1} Y(z)``; the stored local data
    refer to that normalized coefficient.
    """
    R_p = R_p if isinstance(R_p, RationalFunction) else RationalFunction.constant(R_p)
    A_p = A_p if isinstance(A_p, RationalMatrix) else RationalMatrix.constant(A_p)
    q = ctx.q
    mp, rp0 = _leading(R_p, False)
    dp, rpI = _leading(R_p, True)
    Ap0, ApI = _matrix_at(A_p, False), _matrix_at(A_p, True)
    _check_invertible(Ap0, "A_p(0)")
    _check_invertible(ApI, "A_p(infinity)")
    F = A_p.scale(R_p).cancel()
    S0 = _unique(_det_zeros(F) / q)
    SI = _unique(np.concatenate([S0, F.poles() / q]))
    sys = RationalQSystem(
        ctx,
        "sigma_p",
        R_p,
        A_p,
        F,
        -mp,
        1.0 / (rp0 * q**mp),
        -dp,
        1.0 / (rpI * q**dp),
        np.linalg.inv(Ap0),
        np.linalg.inv(ApI),
        S0,
        SI,
        name=name,
    )
    check_resonance(ctx, sys.B0, "r0*A0")
    check_resonance(ctx, sys.BInf, "r_inf*A_inf")
    return sys


# -- local solutions ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LocalSolution:
    """Series part, character and theta power of a local solution."""

    side: str
    coeffs: np.ndarray
    character: CharacterPart
    theta_power: int
    radius: float
    system: RationalQSystem
    max_residual: float = 0.0

    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def ctx(self) -> QContext:
        return self.system.ctx

    def series(self, z) -> np.ndarray:
        """Direct evaluation of the truncated series (no propagation)."""
        z = np.asarray(z, dtype=complex)
        x = z if self.side == "origin" else 1.0 / z
        out = np.zeros(z.shape + self.coeffs.shape[1:], dtype=complex)
        for c in self.coeffs[::-1]:
            out = out * x[..., None, None] + c
        return out

    def steps_needed(self, z) -> int:
        lq = self.ctx.log_abs_q
        r = abs(complex(z))
        if self.side == "origin":
            return max(0, int(math.ceil(math.log(r / self.radius) / lq - 1e-12)))
        return max(0, int(math.ceil(math.log(self.radius / r) / lq - 1e-12)))

    def pole_bases(self) -> list[complex]:
        """Spiral base points through which this solution (or its inverse) may be singular."""
        pts = [-1.0 + 0j] + list(self.character.pole_bases())
        extra = self.system.S0 if self.side == "origin" else self.system.SInf
        return pts + [complex(a) for a in extra]

    def H(self, z, ptol: float | None = None) -> np.ndarray:
        """Series part ``H(z)`` anywhere on C*, continued by the functional equation."""
        z = complex(z)
        if z == 0:
            raise ValueError("z = 0")
        sys = self.system
        ctx = self.ctx
        n = self.steps_needed(z)
        ptol = ctx.proximity_tol if ptol is None else ptol
        if self.side == "origin":
            B = sys.B0
            if n == 0:
                return self.series(z)
            js = np.arange(n, 0, -1)
            us = z * np.exp(-js * ctx.logQ)
            bad = _points_near(ctx, us, sys.S0, ptol)
            if np.any(bad):
                raise PropagationThroughPole(
                    f"propagation point {us[np.argmax(bad)]:.6g} hits a pole of the coefficient"
                )
            Ms = sys.M(us) * (us ** (-sys.mu0))[:, None, None]
            Binv = np.linalg.inv(B)
            H = self.series(us[0])
            for Mk in Ms:
                H = Mk @ H @ Binv
            return H
        B = sys.BInf
        if n == 0:
            return self.series(z)
        js = np.arange(n - 1, -1, -1)
        us = z * np.exp(js * ctx.logQ)
        bad = _points_near(ctx, us, sys.SInf, ptol)
        if np.any(bad):
            raise PropagationThroughPole(
                f"propagation point {us[np.argmax(bad)]:.6g} hits a singular point of the coefficient"
            )
        Ns = sys.M_inv(us) * (us ** sys.muInf)[:, None, None]
        H = self.series(us[0] * ctx.q)
        for Nk in Ns:
            H = Nk @ H @ B
        return H

    def eval_scaled(self, z, ptol: float | None = None) -> tuple[np.ndarray, complex]:
        """``(Ymat, s)`` with ``Y(z) = Ymat * exp(s)``."""
        z = complex(z)
        mu = self.theta_power
        if mu < 0 and near_spiral(self.ctx, z, -1.0, ptol):
            raise OnPoleSpiral("z lies on -q^Z where a negative theta power has poles")
        H = self.H(z, ptol)
        C, s_c = self.character.eval_scaled(z, ptol)
        f, s_t = theta_log(self.ctx, z)
        return H @ C * complex(f) ** mu, s_c + mu * complex(s_t)

    def __call__(self, z, ptol: float | None = None) -> np.ndarray:
        Y, s = self.eval_scaled(z, ptol)
        return Y * cmath.exp(s)


def _recursion(
    ctx: QContext,
    coeff_fn,
    B: np.ndarray,
    radius: float,
    tol: float,
    sign: int,
) -> tuple[np.ndarray, float]:
    """Solve ``q^{sign k} H_k B - B H_k = sum_{j>=1} C_j H_{k-j}``."""
    nu = B.shape[0]
    order = 64
    C = coeff_fn(order)
    H = [np.eye(nu, dtype=complex)]
    small = 0
    worst = 0.0
    k = 0
    while True:
        k += 1
        if k > MAX_TERMS:
            raise NoConvergence(f"series did not reach tolerance {tol:g} within {MAX_TERMS} terms")
        if k > order:
            order = min(2 * order, MAX_TERMS)
            C = coeff_fn(order)
        rhs = np.zeros((nu, nu), dtype=complex)
        for j in range(1, k + 1):
            rhs += C[j] @ H[k - j]
        c = cmath.exp(sign * k * ctx.logQ)
        Hk = sylvester_shifted(B, c, rhs)
        res = np.linalg.norm(c * Hk @ B - B @ Hk - rhs)
        worst = max(worst, res / max(1.0, np.linalg.norm(rhs)))
        H.append(Hk)
        if np.linalg.norm(Hk) * radius**k < tol / 10:
            small += 1
            if small >= 3:
                break
        else:
            small = 0
    return np.array(H), worst


def local_series(sys: RationalQSystem, side: Side = "origin", tol: float = 1e-14) -> LocalSolution:
    """Series part, character and theta power of ``Y_0`` (or ``Y_∞``)."""
    if side == "origin":
        B = sys.B0
        coeffs, worst = _recursion(sys.ctx, sys.M_tilde0, B, sys.r0_radius, tol, +1)
        return LocalSolution(
            "origin", coeffs, CharacterPart(B, sys.ctx), sys.mu0, sys.r0_radius, sys, worst
        )
    if side == "infinity":
        B = sys.BInf
        coeffs, worst = _recursion(sys.ctx, sys.N_tildeInf, B, 1.0 / sys.rInf_radius, tol, -1)
        return LocalSolution(
            "infinity", coeffs, CharacterPart(B, sys.ctx), sys.muInf, sys.rInf_radius, sys, worst
        )
    raise ValueError(f"side must be 'origin' or 'infinity', got {side!r}")


def eval_solution(sol: LocalSolution, z, ptol: float | None = None) -> np.ndarray:
    return sol(z, ptol)


def solution_registry(sol: LocalSolution) -> SpiralSet:
    return SpiralSet(tuple(sol.pole_bases()), sol.ctx).canonical()


def functional_residual(sol: LocalSolution, z) -> float:
    """``||Y(qz) - M(z) Y(z)|| / ||M(z) Y(z)||`` in scaled form."""
    sys = sol.system
    Y1, s1 = sol.eval_scaled(z)
    Y2, s2 = sol.eval_scaled(complex(z) * sys.q)
    rhs = sys.M(np.array([z]))[0] @ Y1
    lhs = Y2 * cmath.exp(s2 - s1)
    return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs))


__all__ = [
    "RationalQSystem",
    "LocalSolution",
    "analyze_system",
    "analyze_sigma_p",
    "check_resonance",
    "local_series",
    "eval_solution",
    "functional_residual",
    "solution_registry",
    "as_cmatrix",
]
