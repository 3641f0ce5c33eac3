"""Reflections, OS positivity of subspaces and the contraction parameterization.

A reflection theta = 2P - I is stored through its fixed space P.  A subspace
H+ is OS-positive for theta when <h, theta h> >= 0 on H+, which happens exactly
when H+ sits inside the graph {u + Cu} of a contraction C from P H into P^perp H.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    DimensionMismatch,
    DomainNotInFixedSpace,
    NotAGraph,
    NotMaximal,
    NotOsPositive,
    NotPositive,
    PreconditionFailed,
)
from .linalg import (
    RANK_RTOL,
    TOL_PROJ,
    TOL_PSD,
    PsdReport,
    Subspace,
    _check_dims,
    adjoint,
    as_operator,
    max_abs,
    null_frame,
    opnorm,
    projection_order_leq,
    psd_check,
    range_frame,
    subspace_meet,
)


@dataclass(frozen=True, eq=False)
class Reflection:
    """Selfadjoint involution theta = 2P - I, P the projection onto ``fixed_space``."""

    fixed_space: Subspace

    @classmethod
    def from_matrix(cls, theta, tol: float = TOL_PROJ) -> "Reflection":
        T = as_operator(theta)
        n = T.shape[0]
        if max_abs(T - adjoint(T)) > tol or max_abs(T @ T - np.eye(n)) > tol:
            raise PreconditionFailed("matrix is not a selfadjoint involution")
        return cls(Subspace.from_projection((T + np.eye(n)) / 2))

    @classmethod
    def diagonal(cls, signs) -> "Reflection":
        """Coordinate reflection diag(signs), signs in {+1, -1}."""
        signs = list(signs)
        if any(s not in (1, -1) for s in signs):
            raise PreconditionFailed("diagonal reflection needs entries +1 or -1")
        return cls(Subspace.coordinate(len(signs), [i for i, s in enumerate(signs) if s == 1]))

    @property
    def ambient_dim(self) -> int:
        return self.fixed_space.ambient_dim

    @cached_property
    def P(self) -> np.ndarray:
        return self.fixed_space.projection()

    @cached_property
    def matrix(self) -> np.ndarray:
        return 2 * self.P - np.eye(self.ambient_dim)

    @cached_property
    def minus_space(self) -> Subspace:
        """The -1 eigenspace P^perp H."""
        return self.fixed_space.complement()

    def apply(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=complex)
        return 2 * self.fixed_space.project(v) - v


@dataclass(frozen=True, eq=False)
class PartialContraction:
    """Linear map from ``domain`` (inside P H) to ``codomain`` (inside P^perp H).

    ``map`` is expressed in frame coordinates, shape (codomain.dim, domain.dim).
    """

    domain: Subspace
    codomain: Subspace
    map: np.ndarray

    def __post_init__(self):
        M = np.array(self.map, dtype=complex).reshape(self.codomain.dim, self.domain.dim)
        M.setflags(write=False)
        object.__setattr__(self, "map", M)

    @property
    def norm(self) -> float:
        return opnorm(self.map)

    def ambient_matrix(self) -> np.ndarray:
        """The map as an operator on the ambient space (zero off the domain)."""
        return self.codomain.frame @ self.map @ adjoint(self.domain.frame)

    def negated(self) -> "PartialContraction":
        return PartialContraction(self.domain, self.codomain, -self.map)

    def kernel(self) -> Subspace:
        return Subspace(self.domain.frame @ null_frame(self.map, ncols=self.domain.dim, scale=1.0))


@dataclass(frozen=True, eq=False)
class SignedFormSpace:
    """L+ x L- with the form <(k+, k-), (l+, l-)> = <k+, l+> - <k-, l->.

    Pairs are stacked as vectors of length 2n: first n entries k+, last n entries k-.
    """

    L_plus: Subspace
    L_minus: Subspace

    def __post_init__(self):
        _check_dims(self.L_plus, self.L_minus)

    @property
    def ambient_dim(self) -> int:
        return self.L_plus.ambient_dim

    def signed_form(self, x, y) -> complex:
        n = self.ambient_dim
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        return complex(np.vdot(x[:n], y[:n]) - np.vdot(x[n:], y[n:]))


def _compressed_form(theta: Reflection, H_plus: Subspace) -> np.ndarray:
    F = H_plus.frame
    thF = 2 * theta.fixed_space.project(F) - F
    return adjoint(F) @ thF


def os_positivity(theta: Reflection, H_plus: Subspace, tol: float = TOL_PSD) -> PsdReport:
    """PSD status of F* theta F, F an orthonormal frame of H+.

    The witness, when present, is returned as an ambient vector in H+.
    """
    _check_dims(theta.fixed_space, H_plus)
    rep = psd_check(_compressed_form(theta, H_plus), tol)
    w = None if rep.witness is None else H_plus.frame @ rep.witness
    return PsdReport(rep.is_psd, rep.min_eigenvalue, w)


def contraction_from_subspace(
    theta: Reflection, H_plus: Subspace, tol: float = TOL_PSD
) -> PartialContraction:
    """Extract C with H+ = {u + Cu : u in P H+}.

    The domain is P H+, possibly a proper subspace of P H.
    """
    rep = os_positivity(theta, H_plus, tol)
    if not rep.is_psd:
        raise NotOsPositive(f"<h, theta h> reaches {rep.min_eigenvalue:.6g} on H+")
    F = H_plus.frame
    X = theta.fixed_space.project(F)
    Y = F - X
    cod = theta.minus_space
    if X.size == 0:
        return PartialContraction(Subspace.zero(theta.ambient_dim), cod, np.zeros((cod.dim, 0)))
    U, s, Vh = np.linalg.svd(X, full_matrices=False)
    r = int(np.sum(s > RANK_RTOL * s[0])) if s[0] > 0 else 0
    D = U[:, :r]
    # C (U_r s_r) = Y V_r  =>  C on the domain frame D is Y V_r / s_r
    images = (Y @ adjoint(Vh[:r])) / s[:r]
    return PartialContraction(Subspace(D), cod, adjoint(cod.frame) @ images)


def _as_fixed(P) -> Subspace:
    return P.fixed_space if isinstance(P, Reflection) else P


def subspace_from_contraction(P, C: PartialContraction, tol: float = TOL_PROJ) -> Subspace:
    """Graph {x + Cx : x in C.domain}; ``P`` is the fixed space or its Reflection."""
    Pfix = _as_fixed(P)
    _check_dims(Pfix, C.domain, C.codomain)
    if not projection_order_leq(C.domain, Pfix, tol):
        raise DomainNotInFixedSpace("contraction domain is not inside P H")
    if not projection_order_leq(C.codomain, Pfix.complement(), tol):
        raise DomainNotInFixedSpace("contraction codomain is not inside P^perp H")
    G = C.domain.frame + C.codomain.frame @ C.map
    return Subspace.span(G)


def is_maximal_os(theta: Reflection, H_plus: Subspace, tol: float = TOL_PSD) -> bool:
    C = contraction_from_subspace(theta, H_plus, tol)
    return C.domain.dim == theta.fixed_space.dim


def zero_extension(theta: Reflection, C: PartialContraction) -> PartialContraction:
    """Extend C by zero to all of P H."""
    Pf = theta.fixed_space.frame
    D = C.domain.frame
    rest = range_frame(Pf - D @ (adjoint(D) @ Pf), scale=1.0)
    dom = np.hstack([D, rest])
    M = np.hstack([C.map, np.zeros((C.codomain.dim, rest.shape[1]), dtype=complex)])
    return PartialContraction(Subspace(dom), C.codomain, M)


def maximal_extension(theta: Reflection, H_plus: Subspace, tol: float = TOL_PSD) -> Subspace:
    """Graph of the zero-extension of the contraction of H+; contains H+ and is maximal."""
    C = contraction_from_subspace(theta, H_plus, tol)
    return subspace_from_contraction(theta, zero_extension(theta, C))


def positive_subspace_to_contraction(
    F: SignedFormSpace, P_sub: Subspace, tol: float = TOL_PSD
) -> PartialContraction:
    """Contraction whose graph is the positive subspace ``P_sub`` of L+ x L-."""
    n = F.ambient_dim
    if P_sub.ambient_dim != 2 * n:
        raise DimensionMismatch(f"P_sub must live in C^{2 * n}, got C^{P_sub.ambient_dim}")
    top = P_sub.frame[:n]
    bot = P_sub.frame[n:]
    if opnorm(top - F.L_plus.project(top)) > TOL_PROJ or opnorm(bot - F.L_minus.project(bot)) > TOL_PROJ:
        raise PreconditionFailed("P_sub is not contained in L+ x L-")
    rep = psd_check(adjoint(top) @ top - adjoint(bot) @ bot, tol)
    if not rep.is_psd:
        raise NotPositive(f"signed form reaches {rep.min_eigenvalue:.6g} on P_sub")
    if top.size == 0:
        return PartialContraction(Subspace.zero(n), F.L_minus, np.zeros((F.L_minus.dim, 0)))
    U, s, Vh = np.linalg.svd(top, full_matrices=True)
    r = int(np.sum(s > RANK_RTOL * s[0])) if s.size and s[0] > 0 else 0
    ker = adjoint(Vh[r:])
    if ker.size and opnorm(bot @ ker) > tol:
        raise NotAGraph("two pairs share k+ but differ in k-")
    D = U[:, :r]
    images = (bot @ adjoint(Vh[:r])) / s[:r]
    return PartialContraction(Subspace(D), F.L_minus, adjoint(F.L_minus.frame) @ images)


@dataclass(frozen=True)
class IntersectionKernel:
    plus_cap_minus: Subspace
    kernel: Subspace
    plus_cap_fixed: Subspace


def intersection_kernel_spaces(theta: Reflection, C: PartialContraction, tol: float = TOL_PROJ) -> IntersectionKernel:
    """H+ ∩ H-, ker C and H+ ∩ P H for H± = graph(±C), C defined on all of P H."""
    if C.domain.dim != theta.fixed_space.dim or not C.domain.same_as(theta.fixed_space, tol):
        raise NotMaximal("contraction is not defined on all of P H")
    Hp = subspace_from_contraction(theta, C)
    Hm = subspace_from_contraction(theta, C.negated())
    return IntersectionKernel(subspace_meet(Hp, Hm), C.kernel(), subspace_meet(Hp, theta.fixed_space))


def intersection_kernel_check(theta: Reflection, C: PartialContraction, tol: float = TOL_PROJ) -> bool:
    sp = intersection_kernel_spaces(theta, C, tol)
    return sp.plus_cap_minus.same_as(sp.kernel, tol) and sp.kernel.same_as(sp.plus_cap_fixed, tol)


def one_dim_os_bound(alpha: float, c: complex, tol: float = 1e-12) -> bool:
    """Closed form |c|^2 <= alpha / (1 - alpha), written as alpha - |c|^2 (1 - alpha) >= -tol."""
    if not 0 < alpha < 1:
        raise PreconditionFailed("alpha must lie in (0, 1)")
    return alpha - abs(c) ** 2 * (1 - alpha) >= -tol


def one_dim_instance(alpha: float, c: complex) -> tuple[Reflection, Subspace]:
    """C^2 realization: P = span{e1}, f = (sqrt(alpha), sqrt(1-alpha)), H+ = C (Pf + c P^perp f)."""
    if not 0 < alpha < 1:
        raise PreconditionFailed("alpha must lie in (0, 1)")
    theta = Reflection.diagonal([1, -1])
    h = np.array([np.sqrt(alpha), c * np.sqrt(1 - alpha)], dtype=complex)
    return theta, Subspace.span(h)


def plus_minus_meet(theta: Reflection, H_plus: Subspace) -> Subspace:
    """H+ ∩ theta H+."""
    return subspace_meet(H_plus, Subspace(theta.matrix @ H_plus.frame))
