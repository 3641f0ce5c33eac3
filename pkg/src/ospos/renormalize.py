"""The renormalized space K = H+/N completed in the form <h, theta h'>.

At finite dimension K is C^k with k the numerical rank of the compressed Gram
G = F* theta F, and the quotient map is q = diag(sqrt(lam)) V* on the retained
eigenpairs.  Operators U obeying the reflection premises descend to K.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import expm

from .errors import (
    DimensionMismatch,
    NonPositiveSpectrum,
    NotAFactorization,
    NotInvariant,
    NotOsPositive,
    NotReflectionSymmetric,
    NotSkewAdjoint,
    NotUnitary,
    SemigroupLawViolation,
)
from .linalg import (
    TOL_PROJ,
    TOL_PSD,
    Subspace,
    adjoint,
    as_operator,
    opnorm,
    psd_check,
    range_frame,
    subspace_join,
)
from .markov import ProjectionTriple, markov_check
from .reflection import Reflection, _compressed_form

RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class RenormalizedSpace:
    """K realized as C^k.

    ``q_matrix`` maps H+ frame coordinates (length m) to K coordinates (length k).
    ``theta`` and ``H_plus`` are absent when the space is built from a bare Gram.
    """

    gram: np.ndarray
    q_matrix: np.ndarray
    gram_eigenvalues: np.ndarray
    eigvecs: np.ndarray
    rank_tol: float
    theta: Optional[Reflection] = None
    H_plus: Optional[Subspace] = None

    @classmethod
    def from_gram(cls, G, rank_tol: float = RANK_TOL, psd_tol: float = TOL_PSD, scale: float = 0.0,
                  **kw) -> "RenormalizedSpace":
        """Keep eigenpairs with lam > rank_tol * max(lam_max, scale).

        ``scale`` anchors the cutoff when the whole form may be null; for
        theta-forms on an orthonormal frame it is 1, the largest possible norm.
        """
        G = as_operator(G)
        rep = psd_check(G, psd_tol)
        if not rep.is_psd:
            raise NotOsPositive(f"form has eigenvalue {rep.min_eigenvalue:.6g} < 0")
        G = (G + adjoint(G)) / 2
        m = G.shape[0]
        if m == 0:
            empty = np.zeros((0, 0), dtype=complex)
            return cls(G, empty, np.zeros(0), empty, rank_tol, **kw)
        w, V = np.linalg.eigh(G)
        w, V = w[::-1], V[:, ::-1]
        keep = w > rank_tol * max(w[0], scale)
        if w[0] <= 0:
            keep[:] = False
        lam, Vk = w[keep], V[:, keep]
        q = np.sqrt(lam)[:, None] * adjoint(Vk)
        return cls(G, q, lam, Vk, rank_tol, **kw)

    @property
    def k_dim(self) -> int:
        return self.q_matrix.shape[0]

    @property
    def h_dim(self) -> int:
        return self.q_matrix.shape[1]

    @property
    def q_pinv(self) -> np.ndarray:
        """Right inverse V_k diag(lam^-1/2) of q_matrix."""
        return self.eigvecs / np.sqrt(self.gram_eigenvalues)

    def q(self, h) -> np.ndarray:
        """Image in K of ambient vectors h in H+ (columns allowed)."""
        if self.H_plus is None:
            return self.q_matrix @ np.asarray(h, dtype=complex)
        return self.q_matrix @ (adjoint(self.H_plus.frame) @ np.asarray(h, dtype=complex))

    def kernel(self) -> np.ndarray:
        """Frame (in H+ coordinates) of the discarded null directions N."""
        return range_frame(np.eye(self.h_dim) - self.eigvecs @ adjoint(self.eigvecs), scale=1.0)


@dataclass(frozen=True, eq=False)
class InducedOperator:
    space: RenormalizedSpace
    matrix: np.ndarray

    def spectrum(self) -> np.ndarray:
        M = self.matrix
        return np.linalg.eigvalsh((M + adjoint(M)) / 2)

    @property
    def hermitian_residual(self) -> float:
        return opnorm(self.matrix - adjoint(self.matrix))


def build_renormalized(theta: Reflection, H_plus: Subspace, rank_tol: float = RANK_TOL,
                       tol: float = TOL_PSD) -> RenormalizedSpace:
    """Quotient-completion of H+ in the form <h, theta h>; raises NotOsPositive."""
    G = _compressed_form(theta, H_plus)
    return RenormalizedSpace.from_gram(G, rank_tol, tol, scale=1.0, theta=theta, H_plus=H_plus)


def q_adjoint(K: RenormalizedSpace) -> np.ndarray:
    """q* : K -> H+ as an ambient matrix (n x k); q* q h = E+ theta h on H+."""
    if K.H_plus is None:
        return adjoint(K.q_matrix)
    return K.H_plus.frame @ adjoint(K.q_matrix)


def factorization_check(theta: Reflection, H_plus: Subspace, B, tol: float = 1e-9) -> bool:
    """Whether F* theta F = B* B, B given on H+ frame coordinates."""
    B = np.atleast_2d(np.asarray(B, dtype=complex))
    if B.shape[1] != H_plus.dim:
        raise DimensionMismatch(f"B needs {H_plus.dim} columns, has {B.shape[1]}")
    G = _compressed_form(theta, H_plus)
    return opnorm(G - adjoint(B) @ B) <= tol


def universal_isometry(K: RenormalizedSpace, B, tol: float = 1e-9) -> np.ndarray:
    """The isometry b: K -> L with b q = B, for any factorization G = B* B."""
    B = np.atleast_2d(np.asarray(B, dtype=complex))
    if B.shape[1] != K.h_dim:
        raise DimensionMismatch(f"B needs {K.h_dim} columns, has {B.shape[1]}")
    if opnorm(K.gram - adjoint(B) @ B) > tol:
        raise NotAFactorization("B* B differs from the form Gram")
    return B @ K.q_pinv


def _require_premises(K: RenormalizedSpace, U: np.ndarray, tol: float) -> None:
    if K.theta is None or K.H_plus is None:
        raise DimensionMismatch("operator induction needs a space built from (theta, H+)")
    n = K.theta.ambient_dim
    if U.shape[0] != n:
        raise DimensionMismatch(f"operator is {U.shape[0]}-dimensional, ambient is {n}")
    if opnorm(adjoint(U) @ U - np.eye(n)) > tol:
        raise NotUnitary("U* U != I")
    F = K.H_plus.frame
    UF = U @ F
    if opnorm(UF - K.H_plus.project(UF)) > tol:
        raise NotInvariant("U does not map H+ into H+")
    T = K.theta.matrix
    if opnorm(T @ U @ T - adjoint(U)) > tol:
        raise NotReflectionSymmetric("theta U theta != U*")


def induce_operator(K: RenormalizedSpace, U, tol: float = 1e-9) -> InducedOperator:
    """U~ on K with U~ q(h) = q(U h)."""
    U = as_operator(U)
    _require_premises(K, U, tol)
    F = K.H_plus.frame
    Uc = adjoint(F) @ U @ F
    return InducedOperator(K, K.q_matrix @ Uc @ K.q_pinv)


def induce_semigroup_generator(K: RenormalizedSpace, A, t0: float, tol: float = 1e-9,
                               law_tol: float = 1e-8) -> np.ndarray:
    """L = -(1/t0) log S_t0 with S_t = (exp(-t A))~, via the eigen-logarithm."""
    A = as_operator(A)
    if opnorm(A + adjoint(A)) > tol:
        raise NotSkewAdjoint("A* != -A")
    S1 = induce_operator(K, expm(-t0 * A), tol).matrix
    S2 = induce_operator(K, expm(-2 * t0 * A), tol).matrix
    resid = opnorm(S1 @ S1 - S2)
    if resid > law_tol:
        raise SemigroupLawViolation(f"S(t0)^2 - S(2 t0) has norm {resid:.3g}")
    w, V = np.linalg.eigh((S1 + adjoint(S1)) / 2)
    if w.size and w.min() <= tol:
        raise NonPositiveSpectrum(f"S(t0) has eigenvalue {w.min():.6g}, log undefined")
    return (V * (-np.log(np.clip(w, None, 1.0)) / t0)) @ adjoint(V)


@dataclass(frozen=True)
class InclusionResult:
    """Outcome of the contractive-inclusion test H0 -> K.

    ``l`` is set in the contractive case; otherwise ``witness`` holds (h+, h0)
    with |<h+, h0>|^2 > <h+, theta h+> ||h0||^2, and ``violation`` is the
    (negative) value of <h+, theta h+> ||h0||^2 - |<h+, h0>|^2.
    """

    contractive: bool
    l: Optional[np.ndarray]
    norm: float
    witness: Optional[tuple] = None
    violation: Optional[float] = None


def contractive_inclusion(theta: Reflection, H_plus: Subspace, H_zero: Subspace,
                          tol: float = 1e-9, rank_tol: float = RANK_TOL) -> InclusionResult:
    K = build_renormalized(theta, H_plus, rank_tol)
    F, F0 = H_plus.frame, H_zero.frame
    M = adjoint(F0) @ F
    # a functional on K exists only if <h0, .> vanishes on N
    N = K.kernel()
    if N.shape[1]:
        MN = M @ N
        if opnorm(MN) > tol:
            U, s, Vh = np.linalg.svd(MN)
            hp = F @ (N @ adjoint(Vh[:1]).ravel())
            h0 = F0 @ U[:, 0]
            return InclusionResult(False, None, float("inf"), (hp, h0), _violation(theta, hp, h0))
    l = (adjoint(K.eigvecs) @ adjoint(M)) / np.sqrt(K.gram_eigenvalues)[:, None]
    nrm = opnorm(l)
    if nrm <= 1 + tol:
        return InclusionResult(True, l, nrm)
    _, _, Vh = np.linalg.svd(l)
    a = adjoint(Vh[:1]).ravel()
    hp = F @ (K.q_pinv @ (l @ a))
    h0 = F0 @ a
    return InclusionResult(False, l, nrm, (hp, h0), _violation(theta, hp, h0))


def _violation(theta: Reflection, hp, h0) -> float:
    form = float(np.vdot(hp, theta.apply(hp)).real)
    return form * float(np.vdot(h0, h0).real) - abs(np.vdot(hp, h0)) ** 2


@dataclass(frozen=True)
class ExtendedSpaces:
    """H0 v H+ and H0 v H-, with optional checks.

    ``swap_residual``: max of ||E-ex theta E+ex - theta E+ex|| and the mirrored
    quantity, when a reflection was supplied.  ``ep3_residual``: ||E+ex E0 -
    E+ex E-ex|| (only meaningful on Markov triples).
    """

    plus: Subspace
    minus: Subspace
    swap_residual: Optional[float]
    ep3_residual: float
    markov: bool


def extended_projections(eps: ProjectionTriple, theta: Optional[Reflection] = None,
                         tol: float = TOL_PROJ) -> ExtendedSpaces:
    plus = subspace_join(eps.H0, eps.H_plus)
    minus = subspace_join(eps.H0, eps.H_minus)
    Ep, Em = plus.projection(), minus.projection()
    swap = None
    if theta is not None:
        T = theta.matrix
        swap = max(opnorm(Em @ T @ Ep - T @ Ep), opnorm(Ep @ T @ Em - T @ Em))
    ep3 = opnorm(Ep @ eps.H0.projection() - Ep @ Em)
    return ExtendedSpaces(plus, minus, swap, ep3, markov_check(eps, tol))

