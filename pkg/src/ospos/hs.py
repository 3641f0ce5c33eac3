"""Gauss-Legendre realization of the kernel (1 - xy)^(s-1) on (-1, 1).

Functions on (-1, 1) are represented by their values at N Gauss-Legendre
nodes.  The form <f, theta g> becomes the Gram G = w w^T (1 - x x^T)^(s-1),
and <f, theta U(a) g> becomes A = w w^T a^(s-1) (1 - x x^T / a^2)^(s-1).
The induced operator U~(a) is the pencil (A, G) restricted to range(G).
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import dblquad

from .errors import GridTooSmall, InvalidS, InvalidScale, QuadratureFailure, RankDeficient

# relative eigenvalue cutoff for whitening G; see the convergence notes in the README
HS_RANK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class HsDiscretization:
    s: float
    N: int
    nodes: np.ndarray
    weights: np.ndarray
    gram: np.ndarray
    min_eigenvalue: float


def _kernel(x, y, s, a=1.0):
    return a ** (s - 1) * (1.0 - np.multiply.outer(x, y) / a**2) ** (s - 1)


def build_hs(s: float, N: int) -> HsDiscretization:
    if not 0 < s < 1:
        raise InvalidS(f"s must lie in (0, 1), got {s}")
    if N < 2:
        raise GridTooSmall(f"need at least 2 nodes, got {N}")
    x, w = leggauss(int(N))
    G = np.outer(w, w) * _kernel(x, x, s)
    G = (G + G.T) / 2
    lam = np.linalg.eigvalsh(G)
    # G is positive definite; in double precision tiny eigenvalues sit at roundoff level
    if lam[0] < -1e-12 * lam[-1] or not np.all(np.isfinite(G)):
        raise QuadratureFailure(f"Gram eigenvalue {lam[0]:.3g} is negative beyond roundoff")
    return HsDiscretization(float(s), int(N), x, w, G, float(lam[0]))


def scaled_kernel_matrix(d: HsDiscretization, a: float) -> np.ndarray:
    """Node-coordinate matrix of <f, theta U(a) g> on H+."""
    if not a > 1:
        raise InvalidScale(f"scale must exceed 1, got {a}")
    x, w = d.nodes, d.weights
    return np.outer(w, w) * _kernel(x, x, d.s, a)


def reflection_symmetry_check(d: HsDiscretization, a: float) -> float:
    """max |A - A^T| for the scaled kernel matrix."""
    return symmetry_residual(scaled_kernel_matrix(d, a))


def symmetry_residual(A) -> float:
    A = np.asarray(A)
    return float(np.max(np.abs(A - A.T)))


@dataclass(frozen=True)
class Whitening:
    """G ~ V diag(lam) V^T on the kept eigenpairs."""

    lam: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        return self.lam.size

    @property
    def condition(self) -> float:
        return float(self.lam.max() / self.lam.min())


def whiten(G: np.ndarray, rank_tol: float = HS_RANK_TOL) -> Whitening:
    lam, V = np.linalg.eigh((G + G.T) / 2)
    keep = lam > rank_tol * lam[-1]
    return Whitening(lam[keep], V[:, keep])


def u_tilde_spectrum(d: HsDiscretization, a: float, k: int, rank_tol: float = HS_RANK_TOL) -> np.ndarray:
    """k largest eigenvalues of A v = lam G v on the numerical range of G, descending."""
    A = scaled_kernel_matrix(d, a)
    W = whiten(d.gram, rank_tol)
    if k > W.rank:
        raise RankDeficient(f"k = {k} exceeds retained rank {W.rank}")
    Y = W.V / np.sqrt(W.lam)
    M = Y.T @ A @ Y
    ev = np.linalg.eigvalsh((M + M.T) / 2)[::-1]
    return ev[:k]


def reference_spectrum(s: float, a: float, k: int) -> np.ndarray:
    """a^(s - 1 - 2n), n = 0..k-1: the moment-expansion eigenvalues of the discretized pencil."""
    n = np.arange(k)
    return a ** (s - 1 - 2.0 * n)


def geometric_set(a: float, k: int, start: int = 1) -> np.ndarray:
    """a^(-2n) for n = start..start+k-1."""
    n = np.arange(start, start + k)
    return a ** (-2.0 * n)


@dataclass(frozen=True)
class ConvergenceStudy:
    s: float
    a: float
    k: int
    Ns: tuple
    eigenvalues: tuple  # one array per N
    changes: tuple  # max |change| from the previous N
    converged_N: int
    tol: float

    @property
    def final(self) -> np.ndarray:
        return self.eigenvalues[-1]


def convergence_study(s: float, a: float, k: int = 3, N0: int = 25, N_max: int = 800, tol: float = 1e-6,
                      rank_tol: float = HS_RANK_TOL, until: int | None = None) -> ConvergenceStudy:
    """Double N from N0 until successive eigenvalue changes fall below ``tol``.

    With ``until`` the doubling continues up to that N regardless.
    """
    Ns, evs, changes = [], [], []
    N = N0
    conv = -1
    while N <= N_max:
        ev = u_tilde_spectrum(build_hs(s, N), a, k, rank_tol)
        if evs:
            ch = float(np.max(np.abs(ev - evs[-1])))
            changes.append(ch)
            if ch < tol and conv < 0:
                conv = N
        else:
            changes.append(float("nan"))
        Ns.append(N)
        evs.append(ev)
        if conv > 0 and (until is None or N >= until):
            break
        N *= 2
    if conv < 0:
        raise QuadratureFailure(f"eigenvalues did not settle to {tol} by N = {Ns[-1]}")
    return ConvergenceStudy(s, a, k, tuple(Ns), tuple(evs), tuple(changes), conv, tol)


def certify_gram_pd(d: HsDiscretization, dps: int | None = None) -> tuple[bool, float, int]:
    """Cholesky of G in ``dps``-digit arithmetic from the double nodes and weights.

    The pivots shrink roughly like 10^(-0.35 N), so by default the precision
    grows with N.  Returns (success, smallest squared Cholesky pivot, dps used).
    """
    if dps is None:
        dps = max(60, int(0.5 * d.N) + 40)
    with mpmath.workdps(dps):
        x = [mpmath.mpf(float(v)) for v in d.nodes]
        w = [mpmath.mpf(float(v)) for v in d.weights]
        N = d.N
        G = mpmath.matrix(N, N)
        for i in range(N):
            for j in range(i, N):
                G[i, j] = G[j, i] = w[i] * w[j] * (1 - x[i] * x[j]) ** (d.s - 1)
        try:
            L = mpmath.cholesky(G)
        except ValueError:
            return False, float("-inf"), dps
        piv = min(L[i, i] ** 2 for i in range(N))
        return True, float(piv), dps


def _bump(x: float) -> float:
    return float(np.exp(-1.0 / (1.0 - x * x))) if abs(x) < 1 else 0.0


def _bump_tilted(x: float) -> float:
    return (1.0 + 0.5 * x) * _bump(x)


@dataclass(frozen=True)
class KernelValidation:
    direct: float
    via_kernel: float
    relative_error: float


def validate_scaled_kernel(s: float, a: float, f=_bump, g=_bump_tilted, epsabs: float = 1e-13,
                           epsrel: float = 1e-11, power: float | None = None) -> KernelValidation:
    """Compare the change of variables against adaptive 2-D integration.

    direct:     int int f(x) (1 - xy)^(s-1) a^power g(a^2 y) dy dx
    via_kernel: int int f(x) a^(s-1) (1 - xy/a^2)^(s-1) g(y) dy dx

    The two agree for the default ``power = s + 1``.
    """
    if not a > 1:
        raise InvalidScale(f"scale must exceed 1, got {a}")
    b = 1.0 / a**2
    power = s + 1 if power is None else power

    def direct(x, y):
        return f(float(x)) * (1 - x * y) ** (s - 1) * a**power * g(float(a * a * y))

    def kern(y, x):
        return f(x) * a ** (s - 1) * (1 - x * y * b) ** (s - 1) * g(y)

    # tanh-sinh for the direct integral, Gauss-Kronrod for the substituted one,
    # so agreement does not come from a shared affine node map
    with mpmath.workdps(20):
        I1 = float(mpmath.quad(direct, [-1, 1], [-b, b]))
    I2, _ = dblquad(kern, -1, 1, -1, 1, epsabs=epsabs, epsrel=epsrel)
    return KernelValidation(I1, I2, abs(I1 - I2) / abs(I2))
