"""Small dense complex linear algebra.

Rational functions and rational matrices (coefficients in ascending powers of
``z``), a Jordan-type decomposition ``B = P (D U) P^{-1}``, the shifted
Sylvester solver used by every series recursion, and the finite logarithm /
exponential of unipotent matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.signal import lfilter

from .errors import (
    IllConditioned,
    NotUnipotent,
    PoleAtZeroOrInfinity,
    ResonantSpectrum,
    SingularInput,
)

JORDAN_TOL = 1e-8


def as_cmatrix(a, name: str = "matrix") -> np.ndarray:
    m = np.array(a, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def _trim(c: np.ndarray) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    nz = np.nonzero(c)[0]
    if len(nz) == 0:
        return np.zeros(1, dtype=complex)
    return c[: nz[-1] + 1].copy()


def _valuation(c: np.ndarray) -> int:
    nz = np.nonzero(c)[0]
    return int(nz[0]) if len(nz) else 0


@dataclass(frozen=True, eq=False)
class RationalFunction:
    """``num(z) / den(z)`` with coefficient arrays in ascending powers.

    After construction trailing zeros are trimmed and the denominator is
    monic. Common factors are *not* cancelled.
    """

    num: np.ndarray
    den: np.ndarray = field(default_factory=lambda: np.ones(1, dtype=complex))

    def __post_init__(self):
        num, den = _trim(self.num), _trim(self.den)
        if not np.all(np.isfinite(num)) or not np.all(np.isfinite(den)):
            raise ValueError("rational function has non-finite coefficients")
        if not np.any(den):
            raise ValueError("denominator is identically zero")
        lead = den[-1]
        object.__setattr__(self, "num", num / lead)
        object.__setattr__(self, "den", den / lead)

    @classmethod
    def constant(cls, c: complex) -> "RationalFunction":
        return cls(np.array([c], dtype=complex))

    @classmethod
    def polynomial(cls, coeffs: Sequence[complex]) -> "RationalFunction":
        return cls(np.asarray(coeffs, dtype=complex))

    @classmethod
    def from_roots(cls, zeros=(), poles=(), scale: complex = 1.0) -> "RationalFunction":
        num = npoly.polyfromroots(zeros) if len(zeros) else np.ones(1)
        den = npoly.polyfromroots(poles) if len(poles) else np.ones(1)
        return cls(scale * np.asarray(num, dtype=complex), np.asarray(den, dtype=complex))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.num)

    def __call__(self, z):
        return npoly.polyval(z, self.num) / npoly.polyval(z, self.den)

    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return other
        return RationalFunction.constant(complex(other))

    def __add__(self, other):
        o = self._coerce(other)
        if len(o.den) == 1 and len(self.den) == 1:
            return RationalFunction(npoly.polyadd(self.num, o.num))
        if len(self.den) == len(o.den) and np.array_equal(self.den, o.den):
            return RationalFunction(npoly.polyadd(self.num, o.num), self.den)
        return RationalFunction(
            npoly.polyadd(npoly.polymul(self.num, o.den), npoly.polymul(o.num, self.den)),
            npoly.polymul(self.den, o.den),
        )

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return RationalFunction(npoly.polymul(self.num, o.num), npoly.polymul(self.den, o.den))

    __rmul__ = __mul__

    def reciprocal(self) -> "RationalFunction":
        if self.is_zero:
            raise ZeroDivisionError("reciprocal of the zero rational function")
        return RationalFunction(self.den, self.num)

    def __truediv__(self, other):
        return self * self._coerce(other).reciprocal()

    def scale_argument(self, c: complex) -> "RationalFunction":
        """Return ``z -> self(c z)``."""
        c = complex(c)
        return RationalFunction(
            self.num * c ** np.arange(len(self.num)), self.den * c ** np.arange(len(self.den))
        )

    @property
    def valuation(self) -> int:
        """Order of vanishing at ``z = 0`` (negative for a pole)."""
        return _valuation(self.num) - _valuation(self.den)

    @property
    def degree(self) -> int:
        """Growth order at infinity: ``deg num - deg den``."""
        return (len(self.num) - 1) - (len(self.den) - 1)

    def laurent0(self, order: int) -> tuple[int, np.ndarray]:
        """``(v, c)`` with ``self(z) = z**v * sum_k c[k] z**k`` near 0, ``c[0] != 0``."""
        if self.is_zero:
            return 0, np.zeros(order + 1, dtype=complex)
        vn, vd = _valuation(self.num), _valuation(self.den)
        n, d = self.num[vn:], self.den[vd:]
        impulse = np.zeros(order + 1, dtype=complex)
        impulse[0] = 1.0
        return vn - vd, lfilter(n, d, impulse)

    def laurent_inf(self, order: int) -> tuple[int, np.ndarray]:
        """``(g, c)`` with ``self(z) = z**g * sum_k c[k] z**(-k)`` near infinity."""
        if self.is_zero:
            return 0, np.zeros(order + 1, dtype=complex)
        rev = RationalFunction(self.num[::-1], self.den[::-1])
        v, c = rev.laurent0(order)
        return self.degree - v, c

    def leading_at_zero(self) -> complex:
        return complex(self.laurent0(0)[1][0])

    def leading_at_infinity(self) -> complex:
        return complex(self.laurent_inf(0)[1][0])

    def cancel(self, rtol: float = 1e-9) -> "RationalFunction":
        """Remove numerically common roots of numerator and denominator."""
        if self.is_zero or len(self.den) == 1:
            return self
        vn, vd = _valuation(self.num), _valuation(self.den)
        v = min(vn, vd)
        num, den = self.num[v:], self.den[v:]
        rn, rd = list(_nonzero_roots(num)), list(_nonzero_roots(den))
        common = 0
        for r in list(rd):
            for i, s in enumerate(rn):
                if abs(r - s) <= rtol * max(1.0, abs(r)):
                    rn.pop(i)
                    rd.remove(r)
                    common += 1
                    break
        if common == 0 and v == 0:
            return self
        vn, vd = vn - v, vd - v
        lead = _trim(num)[-1] / _trim(den)[-1]
        pn = npoly.polyfromroots(rn) if rn else np.ones(1)
        pd = npoly.polyfromroots(rd) if rd else np.ones(1)
        pn = np.concatenate([np.zeros(vn), pn])
        pd = np.concatenate([np.zeros(vd), pd])
        return RationalFunction(lead * np.asarray(pn, dtype=complex), np.asarray(pd, dtype=complex))

    def poles(self) -> np.ndarray:
        """Roots of the (uncancelled) denominator lying in C*."""
        return _nonzero_roots(self.den)

    def zeros(self) -> np.ndarray:
        return _nonzero_roots(self.num)

    def to_json(self) -> dict:
        return {"num": complex_list(self.num), "den": complex_list(self.den)}


def _nonzero_roots(c: np.ndarray) -> np.ndarray:
    c = _trim(c)
    c = c[_valuation(c):]
    if len(c) <= 1:
        return np.zeros(0, dtype=complex)
    return npoly.polyroots(c).astype(complex)


def complex_list(values) -> list:
    return [[float(np.real(v)), float(np.imag(v))] for v in np.ravel(values)]


@dataclass(frozen=True, eq=False)
class RationalMatrix:
    """Square matrix of :class:`RationalFunction` entries."""

    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.entries)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValueError("rational matrix must be square and non-empty")
        rows = tuple(
            tuple(e if isinstance(e, RationalFunction) else RationalFunction.constant(e) for e in r)
            for r in rows
        )
        object.__setattr__(self, "entries", rows)

    @property
    def nu(self) -> int:
        return len(self.entries)

    @classmethod
    def constant(cls, m) -> "RationalMatrix":
        m = as_cmatrix(m)
        return cls(tuple(tuple(RationalFunction.constant(x) for x in row) for row in m))

    @classmethod
    def identity(cls, nu: int) -> "RationalMatrix":
        return cls.constant(np.eye(nu))

    @classmethod
    def scalar(cls, f: RationalFunction, nu: int = 1) -> "RationalMatrix":
        zero = RationalFunction.constant(0.0)
        return cls(tuple(tuple(f if i == j else zero for j in range(nu)) for i in range(nu)))

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape + (self.nu, self.nu), dtype=complex)
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                out[..., i, j] = e(z)
        return out

    def map(self, fn) -> "RationalMatrix":
        return RationalMatrix(tuple(tuple(fn(e) for e in row) for row in self.entries))

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        return RationalMatrix(
            tuple(
                tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(self.entries, other.entries)
            )
        )

    def __mul__(self, other: "RationalMatrix") -> "RationalMatrix":
        n = self.nu
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = RationalFunction.constant(0.0)
                for k in range(n):
                    a, b = self.entries[i][k], other.entries[k][j]
                    if not (a.is_zero or b.is_zero):
                        acc = acc + a * b
                row.append(acc)
            rows.append(tuple(row))
        return RationalMatrix(tuple(rows))

    def cancel(self, rtol: float = 1e-9) -> "RationalMatrix":
        return self.map(lambda e: e.cancel(rtol))

    def scale(self, c) -> "RationalMatrix":
        return self.map(lambda e: e * c)

    def scale_argument(self, c: complex) -> "RationalMatrix":
        return self.map(lambda e: e.scale_argument(c))

    def det(self) -> RationalFunction:
        return _det(self.entries)

    def poles(self) -> np.ndarray:
        pts = [e.poles() for row in self.entries for e in row]
        return _unique_points(np.concatenate(pts) if pts else np.zeros(0, dtype=complex))

    def _expansion(self, order: int, at_infinity: bool) -> tuple[int, np.ndarray]:
        """Common order ``g`` and coefficient array ``(order+1, nu, nu)``.

        Near 0: ``self(z) = z**g sum_k C_k z**k``; near infinity:
        ``self(z) = z**g sum_k C_k z**(-k)``; ``g`` is the minimal valuation
        (resp. maximal degree) over entries.
        """
        expansions = {}
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                if not e.is_zero:
                    expansions[i, j] = e.laurent_inf(order) if at_infinity else e.laurent0(order)
        if not expansions:
            return 0, np.zeros((order + 1, self.nu, self.nu), dtype=complex)
        if at_infinity:
            g = max(v for v, _ in expansions.values())
        else:
            g = min(v for v, _ in expansions.values())
        out = np.zeros((order + 1, self.nu, self.nu), dtype=complex)
        for (i, j), (v, c) in expansions.items():
            shift = (g - v) if at_infinity else (v - g)
            if shift <= order:
                out[shift:, i, j] = c[: order + 1 - shift]
        return g, out

    def taylor0(self, order: int) -> np.ndarray:
        g, c = self._expansion(order, at_infinity=False)
        if g < 0:
            raise PoleAtZeroOrInfinity("matrix has a pole at z = 0", "A analytic at 0")
        if g > 0:
            c = np.concatenate([np.zeros((g,) + c.shape[1:], dtype=complex), c])[: order + 1]
        return c

    def taylor_inf(self, order: int) -> np.ndarray:
        g, c = self._expansion(order, at_infinity=True)
        if g > 0:
            raise PoleAtZeroOrInfinity("matrix has a pole at z = infinity", "A analytic at infinity")
        if g < 0:
            c = np.concatenate([np.zeros((-g,) + c.shape[1:], dtype=complex), c])[: order + 1]
        return c

    def laurent0(self, order: int) -> tuple[int, np.ndarray]:
        return self._expansion(order, at_infinity=False)

    def laurent_inf(self, order: int) -> tuple[int, np.ndarray]:
        return self._expansion(order, at_infinity=True)

    def to_json(self) -> list:
        return [[e.to_json() for e in row] for row in self.entries]


def fuchsian_form(const, poles: Sequence[complex], residues: Sequence) -> RationalMatrix:
    """``const + sum_k z R_k / (z - a_k)`` over the common denominator ``prod (z - a_k)``."""
    const = as_cmatrix(const, "const")
    n = const.shape[0]
    den = npoly.polyfromroots(list(poles)) if len(poles) else np.ones(1)
    den = np.asarray(den, dtype=complex)
    others = []
    for k in range(len(poles)):
        rest = [a for i, a in enumerate(poles) if i != k]
        part = npoly.polyfromroots(rest) if rest else np.ones(1)
        others.append(npoly.polymul([0.0, 1.0], part))
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            num = const[i, j] * den
            for k, Rk in enumerate(residues):
                num = npoly.polyadd(num, as_cmatrix(Rk)[i, j] * np.asarray(others[k], dtype=complex))
            row.append(RationalFunction(num, den))
        rows.append(tuple(row))
    return RationalMatrix(tuple(rows))


def _det(rows) -> RationalFunction:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = RationalFunction.constant(0.0)
    for j in range(n):
        if rows[0][j].is_zero:
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = rows[0][j] * _det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def _unique_points(pts: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    out: list[complex] = []
    for p in np.asarray(pts, dtype=complex).ravel():
        if not any(abs(p - o) <= rtol * max(1.0, abs(o)) for o in out):
            out.append(complex(p))
    return np.array(out, dtype=complex)


def series_inverse(coeffs: np.ndarray) -> np.ndarray:
    """Coefficients of ``F(z)^{-1}`` from those of a matrix power series ``F``."""
    order = coeffs.shape[0] - 1
    f0_inv = np.linalg.inv(coeffs[0])
    out = np.zeros_like(coeffs)
    out[0] = f0_inv
    for k in range(1, order + 1):
        acc = np.einsum("jab,jbc->ac", coeffs[1 : k + 1], out[k - 1 :: -1][:k])
        out[k] = -f0_inv @ acc
    return out


def series_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cauchy product of two matrix power series (same length)."""
    order = a.shape[0] - 1
    out = np.zeros((order + 1, a.shape[1], b.shape[2]), dtype=complex)
    for k in range(order + 1):
        out[k] = np.einsum("jab,jbc->ac", a[: k + 1], b[k::-1])
    return out


# -- Jordan-type decomposition ------------------------------------------------


@dataclass(frozen=True, eq=False)
class JordanData:
    """``B = P (diag(D) U) P^{-1}`` with ``U`` unipotent upper triangular.

    ``U`` only couples indices that share the same entry of ``D``, hence
    ``diag(D) U = U diag(D)``.
    """

    P: np.ndarray
    D: np.ndarray
    U: np.ndarray
    cluster_tol: float = JORDAN_TOL

    @property
    def P_inv(self) -> np.ndarray:
        return np.linalg.inv(self.P)

    @property
    def is_semisimple(self) -> bool:
        return bool(np.allclose(self.U, np.eye(len(self.D)), atol=0.0, rtol=0.0))

    def reconstruct(self) -> np.ndarray:
        return self.P @ (np.diag(self.D) @ self.U) @ np.linalg.inv(self.P)


def _phase_normalize(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    ph = v[k] / abs(v[k])
    return v / ph


def _null_space(a: np.ndarray, dim: int | None = None, rtol: float = 1e-7) -> np.ndarray:
    _, s, vh = np.linalg.svd(a)
    n = a.shape[1]
    if dim is None:
        scale = max(1.0, s[0] if len(s) else 0.0)
        rank = int(np.sum(s > rtol * scale))
        dim = n - rank
    return vh[n - dim :].conj().T


def _flag_basis(N: np.ndarray, scale: float) -> np.ndarray:
    """Orthonormal basis adapted to ker N ⊂ ker N² ⊂ ... (N nilpotent)."""
    m = N.shape[0]
    Q = np.zeros((m, 0), dtype=complex)
    power = np.eye(m, dtype=complex)
    for _ in range(m):
        power = power @ N
        ker = _null_space(power, rtol=1e-7 * max(1.0, scale))
        if Q.shape[1]:
            ker = ker - Q @ (Q.conj().T @ ker)
        if ker.shape[1]:
            u, s, _ = np.linalg.svd(ker, full_matrices=False)
            take = min(int(np.sum(s > 1e-6)), m - Q.shape[1])
            Q = np.hstack([Q, u[:, :take]])
        if Q.shape[1] == m:
            return np.column_stack([_phase_normalize(Q[:, i]) for i in range(m)])
    raise IllConditioned("eigenvalue cluster is not (numerically) a single eigenvalue")


def _cluster(values: np.ndarray, tol: float) -> list[list[int]]:
    clusters: list[list[int]] = []
    for i, v in enumerate(values):
        hit = [c for c in clusters if any(abs(v - values[j]) <= tol for j in c)]
        if hit:
            merged = [i]
            for c in hit:
                merged.extend(c)
                clusters.remove(c)
            clusters.append(sorted(merged))
        else:
            clusters.append([i])
    return sorted(clusters, key=lambda c: c[0])


def eigen_jordan(B, tol: float = JORDAN_TOL) -> JordanData:
    """Decompose an invertible matrix as ``P (D U) P^{-1}``.

    Eigenvalues within ``tol * max(1, ||B||)`` of each other are merged into
    one cluster. If the merged result does not reproduce ``B`` to
    ``1e-10 ||B||`` the eigenvalues were close without being equal and
    :class:`IllConditioned` is raised.
    """
    B = as_cmatrix(B, "B")
    n = B.shape[0]
    if B.shape != (n, n):
        raise ValueError("B must be square")
    if abs(np.linalg.det(B)) <= tol:
        raise SingularInput("matrix is singular (|det B| <= tol)", "B invertible")
    norm = np.linalg.norm(B, 2)
    lam = np.linalg.eigvals(B)
    clusters = _cluster(lam, tol * max(1.0, norm))

    bases, centers = [], []
    for c in clusters:
        mu = complex(np.mean(lam[c]))
        centers.append(mu)
        if len(clusters) == 1:
            V = np.eye(n, dtype=complex)
        elif len(c) == 1:
            V = _phase_normalize(_null_space(B - mu * np.eye(n), dim=1)[:, 0])[:, None]
        else:
            shifted = np.linalg.matrix_power(B - mu * np.eye(n), len(c))
            V = _null_space(shifted, dim=len(c))
        bases.append(V)
    P0 = np.hstack(bases)
    if np.linalg.cond(P0) > 1e10:
        raise IllConditioned("eigenvector basis is ill-conditioned; eigenvalues nearly coincide")
    Bp = np.linalg.solve(P0, B @ P0)

    Ps, Ds, Us = [], [], []
    start = 0
    for c, mu in zip(clusters, centers):
        m = len(c)
        block = Bp[start : start + m, start : start + m]
        if m == 1:
            Q = np.eye(1, dtype=complex)
            mu = complex(block[0, 0])
            T = np.zeros((1, 1), dtype=complex)
        else:
            N = block - mu * np.eye(m)
            Q = _flag_basis(N, norm)
            T = np.triu(Q.conj().T @ N @ Q, k=1)
        Ps.append(Q)
        Ds.extend([mu] * m)
        Us.append(np.eye(m) + T / mu)
        start += m
    Q_all = _block_diag(Ps)
    U_all = _block_diag(Us)
    P = P0 @ Q_all
    jd = JordanData(P=P, D=np.array(Ds, dtype=complex), U=U_all, cluster_tol=tol)
    resid = np.linalg.norm(jd.reconstruct() - B, 2)
    if resid > 1e-10 * norm:
        raise IllConditioned(
            f"Jordan reconstruction residual {resid:.2e} exceeds 1e-10*||B||; "
            "eigenvalues are close but not equal"
        )
    return jd


def _block_diag(blocks: list[np.ndarray]) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=complex)
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i : i + k, i : i + k] = b
        i += k
    return out


# -- Sylvester-type solvers ---------------------------------------------------


def sylvester(left: np.ndarray, right: np.ndarray, C: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Solve ``X @ right - left @ X = C``.

    Raises :class:`ResonantSpectrum` when an eigenvalue of ``right`` equals one
    of ``left`` within ``rtol`` (relative to the spectral scale).
    """
    left, right, C = as_cmatrix(left), as_cmatrix(right), as_cmatrix(C)
    la, lb = np.linalg.eigvals(left), np.linalg.eigvals(right)
    scale = max(1.0, np.max(np.abs(la)), np.max(np.abs(lb)))
    gap = np.min(np.abs(lb[:, None] - la[None, :]))
    if gap <= rtol * scale:
        raise ResonantSpectrum(
            f"spectra overlap (gap {gap:.2e}); eigenvalues must be distinct modulo q^Z",
            "distinct eigenvalues distinct modulo q^Z",
        )
    n, m = C.shape
    # column-major vec: vec(X R) = (R^T ⊗ I) vec X, vec(L X) = (I ⊗ L) vec X
    K = np.kron(right.T, np.eye(n)) - np.kron(np.eye(m), left)
    x = np.linalg.solve(K, C.reshape(-1, order="F"))
    return x.reshape((n, m), order="F")


def sylvester_shifted(M, c: complex, C, rtol: float = 1e-10) -> np.ndarray:
    """Solve ``c X M - M X = C`` (the coefficient recursion kernel)."""
    M = as_cmatrix(M, "M")
    return sylvester(M, complex(c) * M, C, rtol=rtol)


# -- unipotent log / exp ------------------------------------------------------


def unipotent_log(U) -> np.ndarray:
    U = as_cmatrix(U, "U")
    n = U.shape[0]
    N = U - np.eye(n)
    nn = np.linalg.matrix_power(N, n)
    if np.linalg.norm(nn) > 1e-12 * max(1.0, np.linalg.norm(N) ** n):
        raise NotUnipotent("U - I is not nilpotent", "U unipotent")
    out = np.zeros_like(N)
    power = np.eye(n, dtype=complex)
    for k in range(1, n):
        power = power @ N
        out += (-1) ** (k + 1) * power / k
    return out


def nilpotent_exp(L: np.ndarray, s: complex = 1.0) -> np.ndarray:
    """``exp(s L)`` for nilpotent ``L`` by the finite series."""
    n = L.shape[0]
    out = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, n):
        term = term @ (s * L) / k
        out = out + term
    return out


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    """``||a - b|| / max(||b||, tiny)`` in the Frobenius norm."""
    den = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / (den if den > 0 else 1.0))


def is_finite_number(x) -> bool:
    return bool(np.all(np.isfinite(np.asarray(x))))


__all__ = [
    "RationalFunction",
    "RationalMatrix",
    "JordanData",
    "as_cmatrix",
    "complex_list",
    "eigen_jordan",
    "fuchsian_form",
    "nilpotent_exp",
    "relative_error",
    "series_inverse",
    "series_product",
    "sylvester",
    "sylvester_shifted",
    "unipotent_log",
]
