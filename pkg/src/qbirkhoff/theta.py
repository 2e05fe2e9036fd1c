"""Theta function, q-characters, q-logarithm and spiral bookkeeping.

Values are computed with the triple product after reducing the argument into
the annulus ``|q|^{-1/2} <= |w| <= |q|^{1/2}`` through ``Θ(qz) = zΘ(z)``.
Internally a value is a pair ``(f, s)`` meaning ``f * exp(s)``, where ``f`` is
the single factor that can vanish in the reduced annulus. This keeps ratios
such as ``Θ(z)/Θ(z/a)`` accurate when ``q`` is close to 1 and the raw values
under- or overflow.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property

import mpmath
import numpy as np

from .errors import OnPoleSpiral, QTooCloseToOne, ZeroArgument
from .linalg import JordanData, eigen_jordan, nilpotent_exp, unipotent_log

Q_FLOOR = 1e-3
DEFAULT_PTOL = 1e-6


@dataclass(frozen=True)
class QContext:
    """``q = q0**epsilon`` on the principal branch, with ``p = 1/q``."""

    q0: complex
    epsilon: float = 1.0
    proximity_tol: float = DEFAULT_PTOL

    def __post_init__(self):
        q0 = complex(self.q0)
        object.__setattr__(self, "q0", q0)
        if not (math.isfinite(q0.real) and math.isfinite(q0.imag)) or abs(q0) <= 1.0:
            raise ValueError(f"need |q0| > 1, got {q0}")
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError("epsilon must be a positive real")

    @cached_property
    def logQ(self) -> complex:
        return self.epsilon * cmath.log(self.q0)

    @cached_property
    def q(self) -> complex:
        return cmath.exp(self.logQ)

    @property
    def p(self) -> complex:
        return cmath.exp(-self.logQ)

    @property
    def log_abs_q(self) -> float:
        return self.logQ.real

    def qpow(self, x) -> complex:
        """``q**x`` on the fixed branch."""
        return np.exp(np.asarray(x) * self.logQ)

    def check_usable(self) -> None:
        if abs(self.q) < 1.0 + Q_FLOOR:
            raise QTooCloseToOne(
                f"|q| = {abs(self.q):.6f} is below 1 + {Q_FLOOR}; theta evaluation unreliable"
            )

    @cached_property
    def _nterms(self) -> int:
        self.check_usable()
        return int(math.ceil(39.0 / self.log_abs_q)) + 2

    @cached_property
    def _pows(self) -> np.ndarray:
        """``q^{-n}`` for ``n = 1..N``."""
        n = np.arange(1, self._nterms + 1)
        return np.exp(-n * self.logQ)

    @cached_property
    def log_c_inf(self) -> complex:
        """``log prod_{n>=0} (1 - q^{-n-1})`` (any branch; only exp is used)."""
        return complex(np.sum(np.log1p(-self._pows)))

    @property
    def c_inf(self) -> complex:
        return cmath.exp(self.log_c_inf)


# -- spiral coordinates -------------------------------------------------------


def spiral_coordinate(ctx: QContext, z, a) -> tuple[np.ndarray, np.ndarray]:
    """Nearest integer ``n`` and offset ``d`` with ``z = a q^{n+d}``.

    ``d`` is complex in general; the point lies on ``a q^Z`` iff ``d == 0``.
    """
    z = np.asarray(z, dtype=complex)
    ratio = z / a
    n = np.round(np.log(np.abs(ratio)) / ctx.log_abs_q)
    d = np.log(ratio * np.exp(-n * ctx.logQ)) / ctx.logQ
    return n.astype(int), d


def near_spiral(ctx: QContext, z, a, tol: float | None = None) -> np.ndarray:
    tol = ctx.proximity_tol if tol is None else tol
    _, d = spiral_coordinate(ctx, z, a)
    return np.abs(d) <= tol


@dataclass(frozen=True)
class SpiralSet:
    """A finite union of spirals ``a_i q^Z``."""

    base_points: tuple
    ctx: QContext
    proximity_tol: float = DEFAULT_PTOL
    labels: tuple = field(default=())

    def __post_init__(self):
        pts = tuple(complex(a) for a in self.base_points)
        if any(a == 0 for a in pts):
            raise ValueError("spiral base points must be nonzero")
        object.__setattr__(self, "base_points", pts)

    def __len__(self) -> int:
        return len(self.base_points)

    def contains(self, z) -> tuple[int | None, float]:
        """``(index, exponent)`` of the first spiral through ``z``, else ``(None, nan)``."""
        z = complex(z)
        if z == 0:
            raise ZeroArgument("z = 0 lies on no spiral")
        for i, a in enumerate(self.base_points):
            n, d = spiral_coordinate(self.ctx, z, a)
            if abs(d) <= self.proximity_tol:
                return i, float(n + d.real)
        return None, float("nan")

    def hits(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=bool)
        for a in self.base_points:
            out |= near_spiral(self.ctx, z, a, self.proximity_tol)
        return out

    def canonical(self) -> "SpiralSet":
        """Drop duplicate spirals (same spiral, different base point)."""
        keep: list[complex] = []
        for a in self.base_points:
            if not any(near_spiral(self.ctx, a, b, self.proximity_tol) for b in keep):
                keep.append(a)
        return SpiralSet(tuple(keep), self.ctx, self.proximity_tol)


def spiral_contains(s: SpiralSet, z) -> tuple[int | None, float]:
    return s.contains(z)


# -- theta --------------------------------------------------------------------


def _prep(ctx: QContext, z) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ZeroArgument("theta is not defined at z = 0")
    k = np.round(np.log(np.abs(z)) / ctx.log_abs_q).astype(int)
    w = z * np.exp(-k * ctx.logQ)
    return z, k, w


def theta_log(ctx: QContext, z) -> tuple[np.ndarray, np.ndarray]:
    """``(f, s)`` with ``Θ_q(z) = f * exp(s)``; ``f`` carries the only zero."""
    z, k, w = _prep(ctx, z)
    pw = ctx._pows
    wf = w.reshape(-1, 1)
    s = np.sum(np.log1p(pw[None, :] * wf), axis=1)
    s = s + np.sum(np.log1p(pw[None, :-1] / wf), axis=1)
    s = s.reshape(w.shape) + ctx.log_c_inf
    s = s + 0.5 * k * (k - 1) * ctx.logQ + k * np.log(w)
    f = 1.0 + 1.0 / w
    return f, s


def theta_eval(ctx: QContext, z, tol: float = 1e-14, method: str = "product"):
    """``Θ_q(z) = Σ q^{-n(n+1)/2} z^n``.

    ``method="product"`` (default) uses the reduced triple product;
    ``method="series"`` sums the bilateral series in extended precision.
    """
    ctx.check_usable()
    if method == "series":
        return theta_series(ctx, z, tol)
    if method != "product":
        raise ValueError(f"unknown method {method!r}")
    f, s = theta_log(ctx, z)
    out = f * np.exp(s)
    return complex(out) if np.ndim(out) == 0 else out


def series_terms(ctx: QContext, z, tol: float = 1e-14) -> int:
    """Least ``N`` with ``|q|^{-N(N+1)/2} max(|z|, 1/|z|)^N < tol/10``."""
    lq = ctx.log_abs_q
    big = max(1.0, float(np.max(np.abs(z))), float(np.max(1.0 / np.abs(z))))
    target = math.log(tol / 10.0)
    n = 1
    while -0.5 * n * (n + 1) * lq + n * math.log(big) >= target:
        n += 1
    return n


def _oracle_dps(ctx: QContext) -> int:
    """Working digits for the series oracle.

    After reduction to ``|w| ~ 1`` the terms are O(1) while near ``w = -1`` the
    product form shows ``|Θ(w)| ~ |1 + w| (1/q; 1/q)_∞^3 ~ exp(-π²/(2 log|q|))``;
    that many digits are lost to cancellation.
    """
    lost = math.pi ** 2 / (2 * ctx.log_abs_q) / math.log(10)
    return 30 + int(math.ceil(lost))


def _series_mp(ctx: QContext, z, weight: bool):
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ZeroArgument("theta is not defined at z = 0")
    out = np.empty(z.shape, dtype=complex)
    flat = out.reshape(-1)
    dps = _oracle_dps(ctx)
    with mpmath.workdps(dps):
        lq = mpmath.mpf(ctx.epsilon) * mpmath.log(mpmath.mpc(ctx.q0))
        for i, zi in enumerate(z.reshape(-1)):
            k = int(round(math.log(abs(zi)) / ctx.log_abs_q))
            lw = mpmath.log(mpmath.mpc(zi)) - k * lq
            N = series_terms(ctx, complex(mpmath.exp(lw)), 10.0 ** (10 - dps)) + 2
            acc = mpmath.mpc(0)
            dacc = mpmath.mpc(0)
            for n in range(-N, N + 1):
                term = mpmath.exp(-mpmath.mpf(n * (n + 1)) / 2 * lq + n * lw)
                acc += term
                dacc += n * term
            # Θ(q^k w) = q^{k(k-1)/2} w^k Θ(w); z Θ'(z) picks up k Θ
            fac = mpmath.exp(mpmath.mpf(k * (k - 1)) / 2 * lq + k * lw)
            flat[i] = complex(fac * (dacc + k * acc)) if weight else complex(fac * acc)
    return complex(out) if out.ndim == 0 else out


def theta_series(ctx: QContext, z, tol: float = 1e-14):
    """Bilateral sum ``Σ q^{-n(n+1)/2} z^n`` in multiprecision (oracle).

    The argument is first moved to ``|w| ~ 1`` by the exact rule
    ``Θ(q^k w) = q^{k(k-1)/2} w^k Θ(w)``; the working precision grows as
    ``|q| -> 1`` so the cancellation between terms never reaches the result.
    """
    ctx.check_usable()
    return _series_mp(ctx, z, weight=False)


def theta_deriv_series(ctx: QContext, z, tol: float = 1e-14):
    """``z Θ'(z) = Σ n q^{-n(n+1)/2} z^n`` in multiprecision (oracle)."""
    ctx.check_usable()
    return _series_mp(ctx, z, weight=True)


def qpochhammer(ctx: QContext, w, offset: int = 1, tol: float = 1e-16):
    """``prod_{n>=0} (1 - q^{-n-offset} w)`` for ``offset`` in {0, 1}."""
    ctx.check_usable()
    if offset not in (0, 1):
        raise ValueError("offset must be 0 or 1")
    w = np.asarray(w, dtype=complex)
    out = np.ones(w.shape, dtype=complex)
    if offset == 0:
        out = out * (1.0 - w)
    # terms shrink like |q|^{-n}|w|; run until the tail is below tol
    wmax = float(np.max(np.abs(w))) if w.size else 0.0
    if wmax > 0:
        nmax = int(math.ceil((math.log(max(wmax, 1.0)) - math.log(tol)) / ctx.log_abs_q)) + 2
        n = np.arange(1, nmax + 1)
        pw = np.exp(-n * ctx.logQ)
        out = out * np.prod(1.0 - pw[None, :] * w.reshape(-1, 1), axis=1).reshape(w.shape)
    return complex(out) if out.ndim == 0 else out


def qpochhammer_log(ctx: QContext, w, offset: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """``(f, s)`` form of :func:`qpochhammer`.

    Factors ``1 - q^{-n}w`` with modulus below 1/2 (the ones that can vanish)
    are multiplied into ``f``; all others are summed in log form into ``s``.
    """
    ctx.check_usable()
    if offset not in (0, 1):
        raise ValueError("offset must be 0 or 1")
    w = np.asarray(w, dtype=complex)
    flat = w.reshape(-1, 1)
    wmax = float(np.max(np.abs(w))) if w.size else 0.0
    nmax = int(math.ceil((max(math.log(max(wmax, 1e-300)), 0.0) + 39.0) / ctx.log_abs_q)) + 2
    n = np.arange(offset, nmax + 1)
    fac = 1.0 - np.exp(-n * ctx.logQ)[None, :] * flat
    small = np.abs(fac) < 0.5
    f = np.prod(np.where(small, fac, 1.0), axis=1)
    s = np.sum(np.log(np.where(small, 1.0, fac)), axis=1)
    return f.reshape(w.shape), s.reshape(w.shape)


def lambda_log(ctx: QContext, a, z, ptol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """``(f, s)`` form of ``Λ_{q,a}(z) = Θ(z)/Θ(z/a)``."""
    a = complex(a)
    if a == 0:
        raise ValueError("character parameter must be nonzero")
    z = np.asarray(z, dtype=complex)
    if np.any(near_spiral(ctx, z, -a, ptol)):
        raise OnPoleSpiral(f"z lies on the pole spiral -({a:.6g}) q^Z of the character")
    f1, s1 = theta_log(ctx, z)
    f2, s2 = theta_log(ctx, z / a)
    return f1 / f2, s1 - s2


def lambda_char_eval(ctx: QContext, a, z, ptol: float | None = None):
    """``Λ_{q,a}(z) = Θ_q(z) / Θ_q(z/a)``."""
    ctx.check_usable()
    if complex(a) == 1:
        z = np.asarray(z, dtype=complex)
        if np.any(z == 0):
            raise ZeroArgument("z = 0")
        out = np.ones(z.shape, dtype=complex)
        return complex(out) if out.ndim == 0 else out
    f, s = lambda_log(ctx, a, z, ptol)
    out = f * np.exp(s)
    return complex(out) if np.ndim(out) == 0 else out


def lq_eval(ctx: QContext, z, ptol: float | None = None):
    """q-logarithm ``l_q(z) = z Θ'(z) / Θ(z)``, so that ``l_q(qz) = l_q(z) + 1``."""
    ctx.check_usable()
    z, k, w = _prep(ctx, z)
    if np.any(near_spiral(ctx, z, -1.0, ptol)):
        raise OnPoleSpiral("z lies on -q^Z where the q-logarithm has poles")
    pw = ctx._pows
    wf = w.reshape(-1, 1)
    u = pw[None, :] * wf
    v = pw[None, :-1] / wf
    val = np.sum(u / (1.0 + u), axis=1) - np.sum(v / (1.0 + v), axis=1)
    val = val.reshape(w.shape) - 1.0 / (w + 1.0) + k
    return complex(val) if val.ndim == 0 else val


@dataclass(frozen=True, eq=False)
class CharacterPart:
    """Matrix character ``Λ_{q,B} = P diag(Λ_{q,d_i}) exp(log(U) l_q) P^{-1}``."""

    B: np.ndarray
    ctx: QContext
    jordan: JordanData | None = None

    def __post_init__(self):
        B = np.array(self.B, dtype=complex)
        object.__setattr__(self, "B", B)
        if self.jordan is None:
            object.__setattr__(self, "jordan", eigen_jordan(B))

    @cached_property
    def _logU(self) -> np.ndarray:
        return unipotent_log(self.jordan.U)

    @cached_property
    def _Pinv(self) -> np.ndarray:
        return np.linalg.inv(self.jordan.P)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.jordan.D

    def pole_bases(self) -> list[complex]:
        out = [-complex(d) for d in np.unique(np.round(self.jordan.D, 14))]
        if not self.jordan.is_semisimple:
            out.append(-1.0 + 0j)
        return out

    def eval_scaled(self, z, ptol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        """``(M, s)`` with ``Λ_{q,B}(z) = M * exp(s)`` for a single ``z``.

        The common scale ``s`` is the largest log-modulus among the diagonal
        characters, so ``M`` stays representable when ``q`` is near 1.
        """
        z = complex(z)
        fs = [lambda_log(self.ctx, d, z, ptol) for d in self.jordan.D]
        s_ref = max((complex(s).real for _, s in fs), default=0.0)
        diag = np.array(
            [complex(f) * cmath.exp(complex(s) - s_ref) for f, s in fs], dtype=complex
        )
        inner = np.diag(diag)
        if not self.jordan.is_semisimple:
            inner = inner @ nilpotent_exp(self._logU, lq_eval(self.ctx, z, ptol))
        return self.jordan.P @ inner @ self._Pinv, s_ref

    def __call__(self, z, ptol: float | None = None) -> np.ndarray:
        M, s = self.eval_scaled(z, ptol)
        return M * math.exp(s)


def matrix_char_eval(char: CharacterPart, z, ptol: float | None = None) -> np.ndarray:
    return char(z, ptol)


__all__ = [
    "QContext",
    "SpiralSet",
    "CharacterPart",
    "theta_eval",
    "theta_log",
    "theta_series",
    "theta_deriv_series",
    "qpochhammer",
    "qpochhammer_log",
    "lambda_char_eval",
    "lambda_log",
    "lq_eval",
    "matrix_char_eval",
    "spiral_contains",
    "spiral_coordinate",
    "near_spiral",
]
