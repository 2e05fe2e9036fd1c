"""The 2×2 Jimbo–Sakai Lax system and identities relating its connection matrices.

With ``𝒜(z,t) = 𝒜0/z + 𝒜1/(z-1) + 𝒜t/(z-t)`` and ``p = 1/q`` two systems are
built from the same residues:

* the factored system ``Y(z/q) = (I + (p-1) z𝒜(z,t)) Y(z)``, connection ``P``;
* the polynomial system ``Y(z/q) = (z-1)(z-t)(I + (p-1) z𝒜(z,t)) Y(z)``
  ``= (t B0 + A1 z + (I + (p-1)A2) z^2) Y(z)``, connection ``Q``.

``Q`` is an explicit scalar/character multiple of ``P``; see
:func:`q_from_p_rhs`.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .birkhoff import ConnectionMatrix, connection_matrix
from .errors import AlphaOnThetaSpiral, AssumptionViolated, Resonant
from .isomonodromy import DeformationFamily, pseudo_constancy_test
from .linalg import RationalFunction, as_cmatrix, fuchsian_form
from .qsystem import RationalQSystem, analyze_sigma_p, check_resonance
from .theta import (
    CharacterPart,
    QContext,
    near_spiral,
    qpochhammer,
    theta_eval,
    theta_log,
)

HYP_DIAG_A0 = "A0(t) = t B0 is diagonalizable"
HYP_A2 = "A2 = calA0 + calA1 + calAt is diagonal diag(k1, k2)"
HYP_EIG = "t*theta_1, t*theta_2 (resp. 1+(p-1)k_i) are equal or distinct modulo q^Z"
HYP_DET = "det A(z,t) factors with four roots in C*"
HYP_T = "t in U: t != 0, t != 1"

# constant in front of Q = const * (...) * P * (...): derived value and printed value
CONSTANT_VARIANTS = {"derived": 1, "printed": -3}

CORRUPTIONS = (
    "q_power",
    "A2_square",
    "lambda_B0",
    "lambda_tB0",
    "theta_num",
    "theta_den",
    "c_inf",
)


@dataclass(frozen=True, eq=False)
class JimboSakaiSystem:
    calA0: np.ndarray
    calA1: np.ndarray
    calAt: np.ndarray
    t: complex
    ctx: QContext
    A2: np.ndarray
    B0eps: np.ndarray
    A1: np.ndarray
    theta12: np.ndarray
    detRoots: np.ndarray
    detLead: complex

    @property
    def p(self) -> complex:
        return self.ctx.p

    @property
    def q(self) -> complex:
        return self.ctx.q

    @property
    def G(self) -> np.ndarray:
        """Leading coefficient ``I + (p-1) A2``."""
        return np.eye(2) + (self.p - 1) * self.A2

    def zcalA(self, z) -> np.ndarray:
        z = complex(z)
        return self.calA0 + z * self.calA1 / (z - 1) + z * self.calAt / (z - self.t)

    def A_factored(self, z) -> np.ndarray:
        z = complex(z)
        return (z - 1) * (z - self.t) * (np.eye(2) + (self.p - 1) * self.zcalA(z))

    def A_poly(self, z) -> np.ndarray:
        z = complex(z)
        return self.t * self.B0eps + self.A1 * z + self.G * z * z

    def expansion_residual(self, probes) -> float:
        worst = 0.0
        for z in np.ravel(probes):
            a, b = self.A_factored(z), self.A_poly(z)
            worst = max(worst, float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)))
        return worst

    def det_residual(self, probes) -> float:
        worst = 0.0
        for z in np.ravel(probes):
            d = np.linalg.det(self.A_poly(z))
            f = self.detLead * np.prod(complex(z) - self.detRoots)
            worst = max(worst, abs(d - f) / max(abs(d), 1e-300))
        return worst

    @cached_property
    def _Ap(self):
        pm1 = self.p - 1
        return fuchsian_form(
            np.eye(2) + pm1 * self.calA0, [1.0, self.t], [pm1 * self.calA1, pm1 * self.calAt]
        )

    @cached_property
    def factored_system(self) -> RationalQSystem:
        """``Y(z/q) = (I + (p-1) z𝒜) Y``."""
        return analyze_sigma_p(self.ctx, 1.0, self._Ap, name="factored")

    @cached_property
    def polynomial_system(self) -> RationalQSystem:
        """``Y(z/q) = (z-1)(z-t)(I + (p-1) z𝒜) Y``."""
        Rp = RationalFunction.from_roots([1.0, self.t])
        return analyze_sigma_p(self.ctx, Rp, self._Ap, name="polynomial")

    @cached_property
    def P(self) -> ConnectionMatrix:
        return connection_matrix(self.factored_system)

    @cached_property
    def Q(self) -> ConnectionMatrix:
        return connection_matrix(self.polynomial_system)

    @cached_property
    def char_B0inv(self) -> CharacterPart:
        return CharacterPart(np.linalg.inv(self.B0eps), self.ctx)

    @cached_property
    def char_tB0inv(self) -> CharacterPart:
        return CharacterPart(np.linalg.inv(self.B0eps) / self.t, self.ctx)

    def registry_bases(self) -> list[complex]:
        pts = list(self.P.registry.base_points) + list(self.Q.registry.base_points)
        pts += [-1.0, -self.t]
        return pts


def _eig_hypothesis(ctx: QContext, M: np.ndarray, label: str) -> None:
    try:
        check_resonance(ctx, M, label)
    except Resonant as e:
        raise AssumptionViolated(str(e), HYP_EIG) from None


def build_jimbo_sakai(
    calA0,
    calA1,
    calAt,
    t: complex,
    ctx: QContext,
    A2=None,
) -> JimboSakaiSystem:
    """Validate the standing assumptions and derive ``B0``, ``A1``, ``A2`` and det roots."""
    cA0, cA1, cAt = (as_cmatrix(m, n) for m, n in ((calA0, "calA0"), (calA1, "calA1"), (calAt, "calAt")))
    if any(m.shape != (2, 2) for m in (cA0, cA1, cAt)):
        raise ValueError("residues must be 2x2")
    t = complex(t)
    if abs(t) < 1e-12 or abs(t - 1) < 1e-12:
        raise AssumptionViolated(f"t = {t} is not admissible", HYP_T)
    S = cA0 + cA1 + cAt
    if A2 is not None:
        A2 = as_cmatrix(A2, "A2")
        if np.linalg.norm(A2 - S) > 1e-12 * max(1.0, np.linalg.norm(S)):
            raise AssumptionViolated("A2 differs from calA0 + calA1 + calAt", HYP_A2)
    if abs(S[0, 1]) + abs(S[1, 0]) > 1e-12 * max(1.0, np.linalg.norm(S)):
        raise AssumptionViolated("calA0 + calA1 + calAt is not diagonal", HYP_A2)
    A2 = np.diag(np.diag(S))
    p = ctx.p
    I = np.eye(2)
    B0 = I + (p - 1) * cA0
    G = I + (p - 1) * A2
    if abs(np.linalg.det(B0)) < 1e-12 or abs(np.linalg.det(G)) < 1e-12:
        raise AssumptionViolated("B0 or I+(p-1)A2 is singular", HYP_DET)
    th = np.linalg.eigvals(B0)
    if abs(th[0] - th[1]) <= 1e-8 * max(1.0, abs(th[0])):
        if np.linalg.norm(B0 - th[0] * I) > 1e-8 * max(1.0, np.linalg.norm(B0)):
            raise AssumptionViolated("B0 has a repeated eigenvalue and is not diagonalizable", HYP_DIAG_A0)
    _eig_hypothesis(ctx, t * B0, "t*B0")
    _eig_hypothesis(ctx, G, "I+(p-1)A2")
    A1 = -(1 + t) * I + (p - 1) * (-(1 + t) * cA0 - t * cA1 - cAt)
    # det of the quadratic matrix polynomial, ascending coefficients
    coef = [[np.array([t * B0[i, j], A1[i, j], G[i, j]]) for j in range(2)] for i in range(2)]
    det = npoly.polysub(npoly.polymul(coef[0][0], coef[1][1]), npoly.polymul(coef[0][1], coef[1][0]))
    det = np.asarray(det, dtype=complex)
    lead = complex(np.linalg.det(G))
    if len(det) < 5 or abs(det[4] - lead) > 1e-10 * max(1.0, abs(lead)):
        raise AssumptionViolated("determinant is not a quartic with the expected leading term", HYP_DET)
    roots = npoly.polyroots(det)
    if np.any(np.abs(roots) < 1e-12):
        raise AssumptionViolated("determinant vanishes at z = 0", HYP_DET)
    return JimboSakaiSystem(cA0, cA1, cAt, t, ctx, A2, B0, A1, th, roots, lead)


# -- rank-1 closed forms ------------------------------------------------------


@dataclass(frozen=True)
class ScalarSolutionPair:
    """Closed-form solutions of ``y(z/q) = (z - α) y(z)`` at 0 and ∞."""

    ctx: QContext
    alpha: complex

    def y0(self, z) -> complex:
        q, a = self.ctx.q, self.alpha
        return theta_eval(self.ctx, z) / (qpochhammer(self.ctx, q * z / a, 1) * theta_eval(self.ctx, -a * z))

    def yInf(self, z) -> complex:
        q, a = self.ctx.q, self.alpha
        return qpochhammer(self.ctx, a / (q * z), 0) / theta_eval(self.ctx, q * z)

    def ratio(self, z) -> complex:
        """Closed form of ``y_∞^{-1} y_0``."""
        ctx, q, a = self.ctx, self.ctx.q, self.alpha
        return (
            ctx.c_inf * theta_eval(ctx, z) * theta_eval(ctx, q * z)
            / (theta_eval(ctx, -q * z / a) * theta_eval(ctx, -a * z))
        )

    def functional_residual(self, z) -> float:
        """``max`` over both solutions of ``|y(z/q) - (z-α) y(z)| / |y(z/q)|``."""
        q, a = self.ctx.q, self.alpha
        out = 0.0
        for y in (self.y0, self.yInf):
            lhs = y(z / q)
            out = max(out, abs(lhs - (z - a) * y(z)) / abs(lhs))
        return out


def scalar_solutions(ctx: QContext, alpha: complex) -> ScalarSolutionPair:
    alpha = complex(alpha)
    if alpha == 0 or bool(near_spiral(ctx, alpha, -1.0, 1e-9)):
        raise AlphaOnThetaSpiral(f"alpha = {alpha} lies on -q^Z", "alpha not in -q^Z")
    return ScalarSolutionPair(ctx, alpha)


# -- Q from P identity --------------------------------------------------------


def q_from_p_rhs(
    sys: JimboSakaiSystem, z: complex, variant: str = "derived", corrupt: str | None = None
) -> tuple[np.ndarray, complex]:
    """Right side of the ``Q``-from-``P`` identity in scaled form ``(M, s)``.

    ``c_inf^2 Θ(qz)^2 / (Θ(-qz) Θ(-qz/t)) · q^k · G^2 · P · Λ_{B0^{-1}}^{-1} Λ_{t^{-1}B0^{-1}}``
    with ``k = 1`` (``variant="derived"``) or ``k = -3`` (``"printed"``).
    ``corrupt`` drops or alters one factor for negative controls.
    """
    ctx = sys.ctx
    q, t = ctx.q, sys.t
    z = complex(z)
    k = CONSTANT_VARIANTS[variant]
    if corrupt == "q_power":
        k = 0
    f1, s1 = theta_log(ctx, q * z)
    f2, s2 = theta_log(ctx, -q * z)
    f3, s3 = theta_log(ctx, -q * z / t)
    s = 2 * ctx.log_c_inf if corrupt != "c_inf" else 0.0
    fac = 1.0 + 0j
    if corrupt != "theta_num":
        fac *= complex(f1) ** 2
        s += 2 * complex(s1)
    if corrupt != "theta_den":
        fac /= complex(f2) * complex(f3)
        s -= complex(s2) + complex(s3)
    s += k * ctx.logQ
    G = sys.G
    Gp = G if corrupt == "A2_square" else G @ G
    Pm, sP = sys.P.eval_scaled(z)
    L1, sL1 = sys.char_B0inv.eval_scaled(z)
    L2, sL2 = sys.char_tB0inv.eval_scaled(z)
    M = fac * Gp @ Pm
    s += sP
    if corrupt != "lambda_B0":
        M = M @ np.linalg.inv(L1)
        s -= sL1
    if corrupt != "lambda_tB0":
        M = M @ L2
        s += sL2
    return M, s


def q_from_p_residual(
    sys: JimboSakaiSystem,
    z_probes: Sequence[complex],
    variant: str = "derived",
    corrupt: str | None = None,
) -> float:
    """Max relative difference between ``Q(z)`` and :func:`q_from_p_rhs`."""
    worst = 0.0
    for z in np.ravel(z_probes):
        Qm, sQ = sys.Q.eval_scaled(z)
        Rm, sR = q_from_p_rhs(sys, z, variant, corrupt)
        R = Rm * cmath.exp(sR - sQ)
        worst = max(worst, float(np.linalg.norm(Qm - R) / np.linalg.norm(Qm)))
    return worst


# -- pseudo-constancy criterion ----------------------------------------------


@dataclass(frozen=True)
class CriterionResult:
    Qpseudo: bool
    Pcriterion: bool
    Qresidual: float
    Presidual: float

    @property
    def agree(self) -> bool:
        return self.Qpseudo == self.Pcriterion


Residues = Callable[[complex], tuple]


@dataclass(eq=False)
class JimboSakaiFamily:
    """``t -> (calA0, calA1, calAt)`` at fixed ``q``."""

    residues: Residues
    ctx: QContext
    _cache: dict = field(default_factory=dict, repr=False)

    def at(self, t: complex) -> JimboSakaiSystem:
        t = complex(t)
        if t not in self._cache:
            a0, a1, at = self.residues(t)
            self._cache[t] = build_jimbo_sakai(a0, a1, at, t, self.ctx)
        return self._cache[t]

    def deformation_family(self, t_samples) -> DeformationFamily:
        return DeformationFamily(lambda t: self.at(t).polynomial_system, t_samples, strict=False)


def criterion_check(
    family: JimboSakaiFamily,
    t: complex,
    z_probes,
    tol: float = 1e-8,
    sign: int = -1,
) -> CriterionResult:
    """Pseudo-constancy of ``Q`` versus ``P(z,qt) = -P(z,t) t^2 B0``.

    ``sign=+1`` evaluates the deliberately wrong criterion ``P(z,qt) = +P t^2 B0``.
    """
    t = complex(t)
    q = family.ctx.q
    s_t, s_qt = family.at(t), family.at(q * t)
    fam = family.deformation_family([t])
    fam._conn[t] = s_t.Q
    fam._conn[q * t] = s_qt.Q
    pc = pseudo_constancy_test(fam, t, z_probes, tol)
    worst = 0.0
    for z in np.ravel(z_probes):
        P0, a0 = s_t.P.eval_scaled(z)
        P1, a1 = s_qt.P.eval_scaled(z)
        target = sign * P0 @ (t * t * s_t.B0eps)
        worst = max(worst, float(np.linalg.norm(P1 * cmath.exp(a1 - a0) - target) / np.linalg.norm(target)))
    return CriterionResult(pc.pseudoConstant, worst <= tol, pc.maxResidual, worst)


# -- F-hat ratio --------------------------------------------------------------


def fhat_ratio_residual(sys: JimboSakaiSystem, z_probes, literal_exponent: bool = False) -> float:
    """Residual of ``F∞^{-1}F0 = c^2/(Θ(-qz)Θ(-qz/t)) H∞^{-1}H0`` on the series parts.

    ``c = prod (1 - q^{-n-1})``; ``literal_exponent=True`` uses ``prod (1 - q^{n-1})``
    instead, whose ``n = 1`` factor vanishes.
    """
    ctx = sys.ctx
    q, t = ctx.q, sys.t
    if literal_exponent:
        n = np.arange(0, 200)
        with np.errstate(over="ignore", invalid="ignore"):
            c = complex(np.prod(1.0 - np.exp((n - 1) * ctx.logQ)))
        log_c2 = None
        c2 = c * c
    else:
        log_c2 = 2 * ctx.log_c_inf
        c2 = None
    worst = 0.0
    for z in np.ravel(z_probes):
        F0 = sys.Q.sol0.H(z)
        Fi = sys.Q.solInf.H(z)
        H0 = sys.P.sol0.H(z)
        Hi = sys.P.solInf.H(z)
        lhs = np.linalg.solve(Fi, F0)
        f2, s2 = theta_log(ctx, -q * z)
        f3, s3 = theta_log(ctx, -q * z / t)
        if log_c2 is not None:
            scal = cmath.exp(log_c2 - complex(s2) - complex(s3)) / (complex(f2) * complex(f3))
        else:
            scal = c2 * cmath.exp(-complex(s2) - complex(s3)) / (complex(f2) * complex(f3))
        rhs = scal * np.linalg.solve(Hi, H0)
        worst = max(worst, float(np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs)))
    return worst


__all__ = [
    "CORRUPTIONS",
    "CONSTANT_VARIANTS",
    "CriterionResult",
    "JimboSakaiFamily",
    "JimboSakaiSystem",
    "ScalarSolutionPair",
    "build_jimbo_sakai",
    "criterion_check",
    "fhat_ratio_residual",
    "q_from_p_residual",
    "q_from_p_rhs",
    "scalar_solutions",
]
