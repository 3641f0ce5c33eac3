"""Stationary covariance functions r(t) on a finite-dimensional real space V.

Positive definiteness is the PSD property of block Grams [r(t_i - t_j)];
OS positivity is the same for [r(t_i + t_j)] on nonnegative times; the Markov
case is the semigroup law r(t + s) = r(t) r(s).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import GridTooSmall, NegativeTime, NotOsPositive, PreconditionFailed
from .linalg import TOL_PSD, PsdReport, adjoint, opnorm, psd_check
from .renormalize import RANK_TOL, RenormalizedSpace

# below this |x| the removable singularity of (1 - e^-x)/x is evaluated by its series
SERIES_CUTOFF = 1e-6


@dataclass(frozen=True)
class CovarianceFunction:
    name: str
    func: Callable[[float], np.ndarray]
    v_dim: int = 1
    approximate: bool = False
    description: str = ""

    def eval(self, t: float) -> np.ndarray:
        return np.asarray(self.func(float(t)), dtype=float).reshape(self.v_dim, self.v_dim)

    def __call__(self, t: float) -> np.ndarray:
        return self.eval(t)


def _scalar(f):
    return lambda t: np.array([[f(t)]])


def ou(a: float = 1.0) -> CovarianceFunction:
    return CovarianceFunction("ou", _scalar(lambda t: np.exp(-a * abs(t))), description=f"exp(-{a}|t|)")


def _avg_exp_value(x: float) -> float:
    if x < SERIES_CUTOFF:
        return 1.0 - x / 2 + x * x / 6
    return -np.expm1(-x) / x


def avg_exp(b: float = 1.0) -> CovarianceFunction:
    return CovarianceFunction(
        "avg_exp", _scalar(lambda t: _avg_exp_value(b * abs(t))), description=f"(1 - exp(-{b}|t|)) / ({b}|t|)"
    )


def inv_linear() -> CovarianceFunction:
    return CovarianceFunction("inv_linear", _scalar(lambda t: 1.0 / (1.0 + abs(t))), description="1/(1+|t|)")


def inv_sqrt_exp() -> CovarianceFunction:
    def f(t):
        u = abs(t)
        return np.exp(-u / (1.0 + u)) / np.sqrt(1.0 + u)

    return CovarianceFunction("inv_sqrt_exp", _scalar(f), description="(1+|t|)^(-1/2) exp(-|t|/(1+|t|))")


def catalog() -> list[CovarianceFunction]:
    """The four scalar covariances with unit parameters; OU first."""
    return [ou(), avg_exp(), inv_linear(), inv_sqrt_exp()]


def by_name(name: str, **params) -> CovarianceFunction:
    table = {"ou": ou, "avg_exp": avg_exp, "inv_linear": inv_linear, "inv_sqrt_exp": inv_sqrt_exp}
    if name not in table:
        raise PreconditionFailed(f"unknown covariance {name!r}; choose from {sorted(table)}")
    return table[name](**params)


def tabulated(times: Sequence[float], values: Sequence[float], name: str = "table") -> CovarianceFunction:
    """Scalar r from samples at t >= 0, linearly interpolated in |t| (an approximation)."""
    ts = np.asarray(times, dtype=float)
    vs = np.asarray(values, dtype=float)
    order = np.argsort(ts)
    ts, vs = ts[order], vs[order]
    if ts.size < 2 or ts[0] < 0 or np.any(np.diff(ts) <= 0):
        raise PreconditionFailed("table needs at least two distinct nonnegative times")

    def f(t):
        u = abs(t)
        if u > ts[-1] + 1e-12:
            raise PreconditionFailed(f"|t| = {u} outside the table range [0, {ts[-1]}]")
        return np.interp(u, ts, vs)

    return CovarianceFunction(name, _scalar(f), approximate=True, description="linear interpolation of samples")


class GramKind(str, enum.Enum):
    STATIONARY = "Stationary"
    OS_POSITIVE = "OsPositive"


@dataclass(frozen=True)
class GramTestResult:
    grid: tuple
    report: PsdReport
    kind: GramKind
    gram: np.ndarray


def _basis(r: CovarianceFunction, vectors) -> np.ndarray:
    if vectors is None:
        return np.eye(r.v_dim)
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    if V.shape[0] != r.v_dim:
        V = V.T
    return V


def block_gram(r: CovarianceFunction, times: Sequence[float], offset_sign: int, shift: float = 0.0,
               vectors=None) -> np.ndarray:
    """Entries <v_a, r(t_i + offset_sign * t_j + shift) v_b>, index (i, a) row-major."""
    V = _basis(r, vectors)
    k = V.shape[1]
    ts = list(times)
    G = np.zeros((len(ts) * k, len(ts) * k))
    for i, ti in enumerate(ts):
        for j, tj in enumerate(ts):
            G[i * k : (i + 1) * k, j * k : (j + 1) * k] = V.T @ r.eval(ti + offset_sign * tj + shift) @ V
    return G


def _nonneg(times) -> None:
    if any(t < 0 for t in times):
        raise NegativeTime("all times must be >= 0")


def stationary_gram(r: CovarianceFunction, times: Sequence[float], vectors=None,
                    tol: float = TOL_PSD) -> GramTestResult:
    G = block_gram(r, times, -1, vectors=vectors)
    return GramTestResult(tuple(times), psd_check(G, tol), GramKind.STATIONARY, G)


def os_gram(r: CovarianceFunction, times: Sequence[float], vectors=None, tol: float = TOL_PSD) -> GramTestResult:
    _nonneg(times)
    G = block_gram(r, times, 1, vectors=vectors)
    return GramTestResult(tuple(times), psd_check(G, tol), GramKind.OS_POSITIVE, G)


def semigroup_residual(r: CovarianceFunction, pairs: Sequence[tuple]) -> float:
    """max ||r(t + s) - r(t) r(s)|| over the pairs."""
    worst = 0.0
    for s, t in pairs:
        _nonneg((s, t))
        worst = max(worst, opnorm(r.eval(t + s) - r.eval(t) @ r.eval(s)))
    return worst


def semigroup_check(r: CovarianceFunction, pairs: Sequence[tuple], tol: float = 1e-12) -> bool:
    return semigroup_residual(r, pairs) <= tol


@dataclass(frozen=True)
class ReflectedSemigroup:
    """R(s) on the renormalized space of the grid, with its diagnostics.

    ``law_residual`` compares R(s)^2 with R(2s) after compression to the grid
    span; ``kernel_residual`` measures how far the shifted Gram is from
    vanishing on the null directions of the OS Gram.
    """

    space: RenormalizedSpace
    s: float
    matrix: np.ndarray
    spectrum: np.ndarray
    norm: float
    hermitian_residual: float
    law_residual: float
    kernel_residual: float

    @property
    def k_dim(self) -> int:
        return self.space.k_dim


def _compress(K: RenormalizedSpace, A: np.ndarray) -> np.ndarray:
    Qp = K.q_pinv
    return adjoint(Qp) @ A @ Qp


def reflected_semigroup(r: CovarianceFunction, times: Sequence[float], s: float, vectors=None,
                        tol: float = 1e-9, rank_tol: float = RANK_TOL) -> ReflectedSemigroup:
    """R(s) psi_{v,t} = psi_{v,t+s}, realized on K built from the OS Gram of ``times``."""
    ts = list(times)
    if not ts:
        raise GridTooSmall("need at least one time point")
    _nonneg(ts + [s])
    union = sorted(set(ts) | {t + s for t in ts} | {t + 2 * s for t in ts})
    chk = os_gram(r, union, vectors, tol)
    if not chk.report.is_psd:
        raise NotOsPositive(f"OS Gram on the extended grid has eigenvalue {chk.report.min_eigenvalue:.6g}")
    G = block_gram(r, ts, 1, vectors=vectors)
    K = RenormalizedSpace.from_gram(G, rank_tol, tol)
    A1 = block_gram(r, ts, 1, s, vectors)
    A2 = block_gram(r, ts, 1, 2 * s, vectors)
    R1 = _compress(K, A1)
    R2 = _compress(K, A2)
    N = K.kernel()
    kres = opnorm(A1 @ N) if N.shape[1] else 0.0
    spec = np.linalg.eigvalsh((R1 + adjoint(R1)) / 2)
    return ReflectedSemigroup(
        K, float(s), R1, spec[::-1], opnorm(R1), opnorm(R1 - adjoint(R1)), opnorm(R1 @ R1 - R2), kres
    )


def reflected_form(r: CovarianceFunction, t1: float, t2: float, s: float, v1=None, v2=None) -> float:
    """<v1, r(t1 + t2 + s) v2>, the matrix element of R(s) between psi_{v1,t1} and psi_{v2,t2}."""
    v1 = np.ones(r.v_dim) if v1 is None else np.asarray(v1, dtype=float)
    v2 = np.ones(r.v_dim) if v2 is None else np.asarray(v2, dtype=float)
    return float(v1 @ r.eval(t1 + t2 + s) @ v2)

