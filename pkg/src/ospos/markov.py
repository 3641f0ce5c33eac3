"""Projection triples (E0, E+, E-), the Markov property and reflections adapted to them.

A reflection theta belongs to R(eps) when it fixes H0 pointwise and exchanges
H+ and H-.  Markov triples are OS-positive for every such theta; for the
converse direction a randomized constructive search looks for an adapted
reflection with <h+, theta h+> < 0.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidPartition, PreconditionFailed
from .linalg import TOL_PROJ, TOL_PSD, PsdReport, Subspace, _check_dims, adjoint, opnorm, range_frame
from .reflection import Reflection, os_positivity

# a Found witness must beat this margin
WITNESS_MARGIN = 1e-8


@dataclass(frozen=True, eq=False)
class ProjectionTriple:
    H0: Subspace
    H_plus: Subspace
    H_minus: Subspace

    def __post_init__(self):
        _check_dims(self.H0, self.H_plus, self.H_minus)

    @property
    def ambient_dim(self) -> int:
        return self.H0.ambient_dim

    @cached_property
    def E0(self) -> np.ndarray:
        return self.H0.projection()

    @cached_property
    def E_plus(self) -> np.ndarray:
        return self.H_plus.projection()

    @cached_property
    def E_minus(self) -> np.ndarray:
        return self.H_minus.projection()


def r_epsilon_residuals(theta: Reflection, eps: ProjectionTriple) -> tuple[float, float, float]:
    """Norms of theta E0 - E0, E- theta E+ - theta E+ and E+ theta E- - theta E-."""
    if theta.ambient_dim != eps.ambient_dim:
        raise DimensionMismatch(f"reflection on C^{theta.ambient_dim}, triple on C^{eps.ambient_dim}")
    T = theta.matrix
    return (
        opnorm(T @ eps.E0 - eps.E0),
        opnorm(eps.E_minus @ T @ eps.E_plus - T @ eps.E_plus),
        opnorm(eps.E_plus @ T @ eps.E_minus - T @ eps.E_minus),
    )


def in_R_epsilon(theta: Reflection, eps: ProjectionTriple, tol: float = TOL_PROJ) -> bool:
    return max(r_epsilon_residuals(theta, eps)) <= tol


def markov_residual(eps: ProjectionTriple) -> float:
    """||E+ E0 E- - E+ E-||."""
    return opnorm(eps.E_plus @ eps.E0 @ eps.E_minus - eps.E_plus @ eps.E_minus)


def markov_check(eps: ProjectionTriple, tol: float = TOL_PROJ) -> bool:
    return markov_residual(eps) <= tol


def markov_implies_os(eps: ProjectionTriple, theta: Reflection, tol: float = TOL_PROJ,
                      psd_tol: float = TOL_PSD) -> PsdReport:
    """PSD report of E+ theta E+ for a Markov triple and an adapted reflection."""
    if not markov_check(eps, tol):
        raise PreconditionFailed(f"triple is not Markov (residual {markov_residual(eps):.3g})")
    if not in_R_epsilon(theta, eps, tol):
        raise PreconditionFailed(f"theta is not in R(eps) (residuals {r_epsilon_residuals(theta, eps)})")
    return os_positivity(theta, eps.H_plus, psd_tol)


class WitnessStatus(str, enum.Enum):
    FOUND = "Found"
    NOT_FOUND = "NotFound"
    INAPPLICABLE = "Inapplicable"


@dataclass(frozen=True)
class WitnessResult:
    """Outcome of :func:`osm_witness_search`.

    ``violation`` is the minimum of <h, theta h> over unit h in H+ for the
    returned reflection.  For NotFound, ``best_residual`` is the smallest
    R(eps) membership residual seen among the candidate reflections.
    """

    status: WitnessStatus
    reflection: Optional[Reflection] = None
    violation: Optional[float] = None
    trials: int = 0
    best_residual: Optional[float] = None
    diagnostics: dict = field(default_factory=dict)


def _swap_reflection(hp, hm, extra: np.ndarray, n: int) -> Reflection:
    """Reflection with theta hp = hm (unit vectors, <hp, hm> real <= 0), +1 on ``extra``."""
    s = hp + hm
    ns = np.linalg.norm(s)
    cols = [extra] if extra.shape[1] else []
    if ns > 1e-12:
        cols.insert(0, (s / ns).reshape(-1, 1))
    fixed = np.hstack(cols) if cols else np.zeros((n, 0), dtype=complex)
    return Reflection(Subspace(range_frame(fixed)))


def osm_witness_search(eps: ProjectionTriple, trials: int = 64, seed: int = 0,
                       tol: float = TOL_PROJ) -> WitnessResult:
    """Search for theta in R(eps) with E+ theta E+ not positive.

    Each trial picks unit h+ in H+, h- in H- with large |<h+, (E0 - I) h->|,
    rotates h- so that <h+, h-> is negative real, builds the reflection that
    exchanges them on W = span{h+, h-} and extends it by +1 on a complement.
    Even trials use all of W-perp; odd trials use (H0 - W) plus a random part.
    """
    if markov_check(eps, tol):
        return WitnessResult(WitnessStatus.INAPPLICABLE)
    rng = np.random.default_rng(seed)
    n = eps.ambient_dim
    Fp, Fm = eps.H_plus.frame, eps.H_minus.frame
    D = adjoint(Fp) @ (eps.E0 - np.eye(n)) @ Fm
    U, sv, Vh = np.linalg.svd(D)
    best = np.inf
    best_gap = 0.0
    for t in range(trials):
        if t < 2:
            a, b = U[:, 0], np.conj(Vh[0])
        else:
            a = rng.standard_normal(Fp.shape[1]) + 1j * rng.standard_normal(Fp.shape[1])
            b = adjoint(D) @ a
            if np.linalg.norm(b) < 1e-12:
                b = rng.standard_normal(Fm.shape[1]) + 1j * rng.standard_normal(Fm.shape[1])
        hp = Fp @ a
        hm = Fm @ b
        hp = hp / np.linalg.norm(hp)
        hm = hm / np.linalg.norm(hm)
        z = np.vdot(hp, hm)
        if abs(z) > 1e-14:
            hm = hm * (-np.conj(z) / abs(z))
        best_gap = max(best_gap, abs(np.vdot(hp, (eps.E0 - np.eye(n)) @ hm)))
        W = range_frame(np.column_stack([hp, hm]))
        Wperp = null_complement(W, n)
        if t % 2 == 0:
            extra = Wperp
        else:
            H0W = range_frame(eps.H0.frame - W @ (adjoint(W) @ eps.H0.frame), scale=1.0) if eps.H0.dim else np.zeros((n, 0))
            rest = null_complement(np.hstack([W, H0W]), n)
            k = int(rng.integers(0, rest.shape[1] + 1))
            R = rest @ (rng.standard_normal((rest.shape[1], k)) + 1j * rng.standard_normal((rest.shape[1], k)))
            extra = range_frame(np.hstack([H0W, R])) if (H0W.shape[1] + k) else np.zeros((n, 0))
        theta = _swap_reflection(hp, hm, extra, n)
        res = max(r_epsilon_residuals(theta, eps))
        best = min(best, res)
        if res <= tol:
            rep = os_positivity(theta, eps.H_plus)
            if rep.min_eigenvalue < -WITNESS_MARGIN:
                return WitnessResult(WitnessStatus.FOUND, theta, rep.min_eigenvalue, t + 1, res,
                                     {"markov_residual": markov_residual(eps)})
    return WitnessResult(WitnessStatus.NOT_FOUND, None, None, trials, float(best),
                         {"markov_residual": markov_residual(eps), "max_markov_gap": float(best_gap)})


def null_complement(W: np.ndarray, n: int) -> np.ndarray:
    """Orthonormal frame of the orthogonal complement of the columns of W in C^n."""
    if W.shape[1] == 0:
        return np.eye(n, dtype=complex)
    return Subspace(range_frame(W)).complement().frame


def _check_partition(partition: Sequence[Sequence[int]], n: int) -> list[list[int]]:
    blocks = [sorted(int(i) for i in B) for B in partition]
    flat = [i for B in blocks for i in B]
    if any(len(B) == 0 for B in blocks):
        raise InvalidPartition("empty block")
    if sorted(flat) != list(range(n)):
        raise InvalidPartition(f"blocks must cover 0..{n - 1} exactly once")
    return blocks


def conditional_expectation(partition: Sequence[Sequence[int]], weights=None) -> Subspace:
    """Partition-measurable functions as a subspace of L^2(p).

    L^2(p) on n points is identified with C^n through psi -> sqrt(p) psi, so
    the orthogonal projection onto the returned subspace is the conditional
    expectation in those coordinates.  Uniform weights by default.
    """
    n = sum(len(B) for B in partition)
    blocks = _check_partition(partition, n)
    p = _weights(weights, n)
    F = np.zeros((n, len(blocks)), dtype=complex)
    for j, B in enumerate(blocks):
        F[B, j] = np.sqrt(p[B]) / np.sqrt(p[B].sum())
    return Subspace(F)


def expectation_operator(partition: Sequence[Sequence[int]], weights=None) -> np.ndarray:
    """E[psi | partition] acting on plain function values psi."""
    n = sum(len(B) for B in partition)
    blocks = _check_partition(partition, n)
    p = _weights(weights, n)
    M = np.zeros((n, n))
    for B in blocks:
        M[np.ix_(B, B)] = p[B] / p[B].sum()
    return M


def _weights(weights, n: int) -> np.ndarray:
    if weights is None:
        return np.full(n, 1.0 / n)
    p = np.asarray(weights, dtype=float)
    if p.shape != (n,) or np.any(p <= 0):
        raise InvalidPartition("weights must be positive, one per point")
    return p / p.sum()
