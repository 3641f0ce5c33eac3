"""Dense complex linear algebra: subspaces, projections and PSD certification.

Operators are plain square ``complex128`` numpy arrays.  Closed subspaces of
C^n are stored as :class:`Subspace` objects holding an orthonormal frame, and
are identified with their orthogonal projections.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NotHermitian

TOL_PROJ = 1e-10
TOL_ORTHO = 1e-10
TOL_PSD = 1e-10
# singular values below RANK_RTOL * largest count as zero
RANK_RTOL = 1e-12


def as_operator(M) -> np.ndarray:
    """Return ``M`` as a square complex array (real input is embedded)."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"operator must be square, got shape {A.shape}")
    return A


def adjoint(M: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(M, -1, -2))


def max_abs(M) -> float:
    M = np.asarray(M)
    return float(np.max(np.abs(M))) if M.size else 0.0


def opnorm(M) -> float:
    """Spectral norm; zero for empty matrices."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def numerical_rank(M, rtol: float = RANK_RTOL) -> int:
    M = np.asarray(M)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def range_frame(M, rtol: float = RANK_RTOL, scale: float = 0.0) -> np.ndarray:
    """Orthonormal basis of the column space of ``M`` (rank-revealing SVD).

    Singular values count when above ``rtol * max(s_max, scale)``; pass the
    natural size of ``M`` as ``scale`` when ``M`` may be pure roundoff.
    """
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    if M.size == 0:
        return np.zeros((n, 0), dtype=complex)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s[0] == 0.0:
        return np.zeros((n, 0), dtype=complex)
    r = int(np.sum(s > rtol * max(s[0], scale)))
    return U[:, :r]


def null_frame(M, rtol: float = RANK_RTOL, ncols: Optional[int] = None, scale: float = 0.0) -> np.ndarray:
    """Orthonormal basis of the null space of ``M``."""
    M = np.asarray(M, dtype=complex)
    m = M.shape[1] if ncols is None else ncols
    if M.size == 0:
        return np.eye(m, dtype=complex)
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    r = int(np.sum(s > rtol * max(s[0], scale))) if s.size and s[0] > 0 else 0
    return adjoint(Vh[r:])


@dataclass(frozen=True, eq=False)
class Subspace:
    """Closed subspace of C^n given by an orthonormal frame (n x k, k may be 0)."""

    frame: np.ndarray

    def __post_init__(self):
        F = np.array(self.frame, dtype=complex)
        if F.ndim == 1:
            F = F.reshape(-1, 1)
        if F.ndim != 2:
            raise DimensionMismatch("frame must be a 2-d array")
        F.setflags(write=False)
        object.__setattr__(self, "frame", F)

    # -- constructors -----------------------------------------------------
    @classmethod
    def span(cls, vectors, rtol: float = RANK_RTOL) -> "Subspace":
        """Span of the columns of ``vectors``."""
        V = np.asarray(vectors, dtype=complex)
        if V.ndim == 1:
            V = V.reshape(-1, 1)
        return cls(range_frame(V, rtol))

    @classmethod
    def from_frame(cls, frame, tol: float = TOL_ORTHO) -> "Subspace":
        """Wrap a frame, checking orthonormality of its columns."""
        S = cls(frame)
        k = S.dim
        res = max_abs(adjoint(S.frame) @ S.frame - np.eye(k))
        if res > tol:
            raise DimensionMismatch(f"frame columns are not orthonormal (residual {res:.3g})")
        return S

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(np.zeros((n, 0), dtype=complex))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(np.eye(n, dtype=complex))

    @classmethod
    def coordinate(cls, n: int, indices) -> "Subspace":
        """Span of the standard basis vectors e_i, i in ``indices`` (0-based)."""
        return cls(np.eye(n, dtype=complex)[:, list(indices)])

    @classmethod
    def from_projection(cls, E, tol: float = 0.5) -> "Subspace":
        """Range of a (near-)projection: eigenvectors of its Hermitian part above ``tol``."""
        E = as_operator(E)
        H = (E + adjoint(E)) / 2
        w, V = np.linalg.eigh(H)
        return cls(V[:, w > tol])

    # -- basic data ---------------------------------------------------------
    @property
    def ambient_dim(self) -> int:
        return self.frame.shape[0]

    @property
    def dim(self) -> int:
        return self.frame.shape[1]

    def projection(self) -> np.ndarray:
        return self.frame @ adjoint(self.frame)

    def project(self, v) -> np.ndarray:
        return self.frame @ (adjoint(self.frame) @ np.asarray(v, dtype=complex))

    def complement(self) -> "Subspace":
        return Subspace(null_frame(adjoint(self.frame), ncols=self.ambient_dim))

    def contains(self, other: "Subspace", tol: float = TOL_PROJ) -> bool:
        return projection_order_leq(other, self, tol)

    def same_as(self, other: "Subspace", tol: float = TOL_PROJ) -> bool:
        _check_dims(self, other)
        return max_abs(self.projection() - other.projection()) <= tol

    def __repr__(self) -> str:
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dim})"


@dataclass(frozen=True)
class PsdReport:
    is_psd: bool
    min_eigenvalue: float
    witness: Optional[np.ndarray] = None


def _check_dims(*subspaces: Subspace) -> None:
    dims = {S.ambient_dim for S in subspaces}
    if len(dims) > 1:
        raise DimensionMismatch(f"ambient dimensions differ: {sorted(dims)}")


def hermitian_check(M, tol: float = TOL_PROJ) -> bool:
    M = as_operator(M)
    return max_abs(M - adjoint(M)) <= tol


def psd_check(M, tol: float = TOL_PSD, herm_tol: Optional[float] = None) -> PsdReport:
    """Smallest eigenvalue of a Hermitian matrix and a unit eigenvector for it.

    ``herm_tol`` defaults to ``TOL_PROJ`` scaled by ``max(1, max|M|)``.
    An empty matrix is vacuously PSD.
    """
    M = as_operator(M)
    if M.shape[0] == 0:
        return PsdReport(True, float("inf"), None)
    if herm_tol is None:
        herm_tol = TOL_PROJ * max(1.0, max_abs(M))
    if not hermitian_check(M, herm_tol):
        raise NotHermitian(f"max |M - M*| = {max_abs(M - adjoint(M)):.3g} exceeds {herm_tol:.3g}")
    w, V = np.linalg.eigh((M + adjoint(M)) / 2)
    lam = float(w[0])
    return PsdReport(lam >= -tol, lam, V[:, 0].copy())


def projection_order_leq(E: Subspace, P: Subspace, tol: float = TOL_PROJ) -> bool:
    """E <= P in the projection order, tested as ||P E - E|| <= tol."""
    _check_dims(E, P)
    if E.dim == 0:
        return True
    # ||P E - E|| = ||(I - P) F_E|| since F_E is an isometry onto E
    resid = E.frame - P.frame @ (adjoint(P.frame) @ E.frame)
    return opnorm(resid) <= tol


def subspace_meet(E1: Subspace, E2: Subspace, rtol: float = 1e-8) -> Subspace:
    """Exact intersection, the null space of the stacked complementary projections.

    ``rtol`` is the relative singular-value cutoff of the rank-revealing SVD.
    """
    _check_dims(E1, E2)
    n = E1.ambient_dim
    if E1.dim == 0 or E2.dim == 0:
        return Subspace.zero(n)
    # h in E1 ∩ E2 iff h = F1 c and (I - E2) F1 c = 0
    F1 = E1.frame
    R = F1 - E2.frame @ (adjoint(E2.frame) @ F1)
    _, sv, Vh = np.linalg.svd(R, full_matrices=True)
    # singular values of R are sines of principal angles, so the cutoff is absolute
    r = int(np.sum(sv > rtol))
    return Subspace(F1 @ adjoint(Vh[r:]))


def subspace_join(*subspaces: Subspace) -> Subspace:
    """Closed span of the union."""
    _check_dims(*subspaces)
    return Subspace.span(np.hstack([S.frame for S in subspaces]))


@dataclass(frozen=True)
class AlternatingProjectionResult:
    subspace: Subspace
    limit: np.ndarray
    traces: tuple
    iterations: int


def alternating_projection_run(
    E1: Subspace, E2: Subspace, max_iter: int = 64, tol: float = 1e-10, squaring: bool = True
) -> AlternatingProjectionResult:
    """Iterate T_n = (E1 E2)^n until ||T_next - T_n|| <= tol.

    With ``squaring`` the iteration visits n = 1, 2, 4, 8, ... (each step squares
    the current power), which is the same sequence sampled geometrically.
    """
    _check_dims(E1, E2)
    T1 = E1.projection() @ E2.projection()
    T = T1
    traces = [float(np.trace(T).real)]
    for it in range(1, max_iter + 1):
        T_next = T @ T if squaring else T @ T1
        traces.append(float(np.trace(T_next).real))
        if opnorm(T_next - T) <= tol:
            return AlternatingProjectionResult(Subspace.from_projection(T_next), T_next, tuple(traces), it)
        T = T_next
    raise NoConvergence(f"(E1 E2)^n not settled after {max_iter} steps")


def alternating_projection_limit(
    E1: Subspace, E2: Subspace, max_iter: int = 64, tol: float = 1e-10
) -> Subspace:
    """Projection onto E1 ∩ E2 as the strong limit of (E1 E2)^n."""
    return alternating_projection_run(E1, E2, max_iter, tol).subspace


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_subspace(n: int, k: int, rng: np.random.Generator) -> Subspace:
    return Subspace(random_unitary(n, rng)[:, :k])
