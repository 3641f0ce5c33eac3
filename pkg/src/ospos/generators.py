"""Random instances with known structure, for property tests and the acceptance run."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .linalg import Subspace, adjoint, random_unitary
from .markov import ProjectionTriple, conditional_expectation
from .reflection import PartialContraction, Reflection


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_contraction(rows: int, cols: int, rng: np.random.Generator, unit_dirs: int = 0,
                       norm: float | None = None) -> np.ndarray:
    """rows x cols matrix with norm <= 1 and ``unit_dirs`` singular values equal to 1.

    With ``norm`` set, the largest singular value is exactly that value instead.
    """
    r = min(rows, cols)
    if r == 0:
        return np.zeros((rows, cols), dtype=complex)
    U = random_unitary(rows, rng)[:, :r]
    V = random_unitary(cols, rng)[:, :r]
    sv = rng.uniform(0.0, 0.95, r)
    unit_dirs = min(unit_dirs, r)
    sv[:unit_dirs] = 1.0
    if norm is not None:
        sv = sv / sv.max() * norm if sv.max() > 0 else sv
        sv[0] = norm
    return (U * sv) @ adjoint(V)


def random_reflection(n: int, rng: np.random.Generator, p: int | None = None) -> Reflection:
    if p is None:
        p = int(rng.integers(1, n)) if n > 1 else 1
    return Reflection(Subspace(random_unitary(n, rng)[:, :p]))


@dataclass(frozen=True)
class GraphInstance:
    theta: Reflection
    C: PartialContraction
    H_plus: Subspace
    kernel_dim: int  # dimension of the null space of the form on H_plus


def graph_instance(n: int, rng: np.random.Generator, unit_dirs: int = 0, sub_dim: int | None = None) -> GraphInstance:
    """theta random, C full-domain with ``unit_dirs`` isometric directions.

    H+ is the whole graph, or a random ``sub_dim``-dimensional part of it taken
    inside the span of the non-isometric directions plus the isometric ones.
    """
    theta = random_reflection(n, rng)
    Pf, Qf = theta.fixed_space, theta.minus_space
    M = random_contraction(Qf.dim, Pf.dim, rng, unit_dirs)
    C = PartialContraction(Pf, Qf, M)
    graph = Pf.frame + Qf.frame @ M
    sv = np.linalg.svd(M, compute_uv=False)
    kdim = int(np.sum(np.abs(sv - 1.0) < 1e-12))
    if sub_dim is None or sub_dim >= Pf.dim:
        return GraphInstance(theta, C, Subspace.span(graph), kdim)
    # a generic sub-span meets the isometric directions only if it is large enough
    coeff = complex_normal(rng, (Pf.dim, sub_dim))
    H = Subspace.span(graph @ coeff)
    kdim_sub = max(0, sub_dim - (Pf.dim - kdim))
    return GraphInstance(theta, C, H, kdim_sub)


@dataclass(frozen=True)
class ConformingInstance:
    """theta, a full-domain graph H+ and commuting unitaries meeting the induction premises.

    Each unitary is diag(D1, D2) in the P + P-perp splitting with D1, D2 sign
    matrices, and C intertwines them (C D1 = D2 C), so U H+ = H+ and
    theta U theta = U = U*.
    """

    theta: Reflection
    C: PartialContraction
    H_plus: Subspace
    unitaries: tuple


def conforming_instance(n: int, rng: np.random.Generator, n_unitaries: int = 2, unit_dirs: int = 0) -> ConformingInstance:
    p = int(rng.integers(1, n)) if n > 1 else 1
    q = n - p
    classes = list(itertools.product((1, -1), repeat=n_unitaries))
    lab_p = rng.integers(0, len(classes), p)
    lab_q = rng.integers(0, len(classes), q)
    M = np.zeros((q, p), dtype=complex)
    for c in range(len(classes)):
        ip, iq = np.flatnonzero(lab_p == c), np.flatnonzero(lab_q == c)
        if ip.size and iq.size:
            M[np.ix_(iq, ip)] = random_contraction(iq.size, ip.size, rng, unit_dirs)
    R = random_unitary(n, rng)
    Pf, Qf = Subspace(R[:, :p]), Subspace(R[:, p:])
    theta = Reflection(Pf)
    C = PartialContraction(Pf, Qf, M)
    H = Subspace.span(Pf.frame + Qf.frame @ M)
    Us = []
    for j in range(n_unitaries):
        d = np.concatenate([[classes[c][j] for c in lab_p], [classes[c][j] for c in lab_q]]).astype(complex)
        Us.append((R * d) @ adjoint(R))
    return ConformingInstance(theta, C, H, tuple(Us))


@dataclass(frozen=True)
class MarkovInstance:
    triple: ProjectionTriple
    theta: Reflection


def markov_instance(n: int, rng: np.random.Generator) -> MarkovInstance:
    """Markov triple H0 = Z + H0', H+- = H0' + A+- with theta fixing H0, exchanging A+ and A-."""
    a = int(rng.integers(0, n // 2 + 1))
    h0 = int(rng.integers(0, n - 2 * a + 1))
    z = int(rng.integers(0, n - 2 * a - h0 + 1))
    R = random_unitary(n, rng)
    cols = np.cumsum([0, h0, a, a, z])
    B0, Ap, Am, Z, Rest = np.split(R, cols[1:], axis=1)
    X = random_unitary(a, rng) if a else np.zeros((0, 0), dtype=complex)
    # theta = I on B0 + Z, swaps Ap <-> Am through X, random reflection on the rest
    k = Rest.shape[1]
    kp = int(rng.integers(0, k + 1))
    Wr = Rest @ random_unitary(k, rng)[:, :kp] if k else np.zeros((n, 0), dtype=complex)
    # +1 eigenvectors of the swap block: (u + Am X u)/sqrt2 for u in Ap
    swap_fixed = (Ap + Am @ X) / np.sqrt(2)
    theta = Reflection(Subspace(np.hstack([B0, Z, swap_fixed, Wr])))
    triple = ProjectionTriple(Subspace(np.hstack([B0, Z])), Subspace(np.hstack([B0, Ap])), Subspace(np.hstack([B0, Am])))
    return MarkovInstance(triple, theta)


def markov_chain_instance(k: int, m: int, rng: np.random.Generator) -> MarkovInstance:
    """Three-step reversible chain (past, present, future) on k x m x k points.

    Weights p(a, b, c) = p0(b) K(a|b) K(c|b).  H- = functions of (a, b),
    H0 = functions of b, H+ = functions of (b, c); theta swaps a and c.
    """
    p0 = rng.uniform(0.2, 1.0, m)
    K = rng.uniform(0.1, 1.0, (k, m))
    K /= K.sum(axis=0, keepdims=True)
    pts = list(itertools.product(range(k), range(m), range(k)))
    idx = {x: i for i, x in enumerate(pts)}
    w = np.array([p0[b] * K[a, b] * K[c, b] for a, b, c in pts])

    def part(key):
        blocks = {}
        for x in pts:
            blocks.setdefault(key(x), []).append(idx[x])
        return list(blocks.values())

    Hm = conditional_expectation(part(lambda x: (x[0], x[1])), w)
    H0 = conditional_expectation(part(lambda x: x[1]), w)
    Hp = conditional_expectation(part(lambda x: (x[1], x[2])), w)
    n = len(pts)
    T = np.zeros((n, n))
    for (a, b, c), i in idx.items():
        T[i, idx[(c, b, a)]] = 1.0
    return MarkovInstance(ProjectionTriple(H0, Hp, Hm), Reflection.from_matrix(T))


def planted_pair(n: int, d1: int, d2: int, k: int, rng: np.random.Generator) -> tuple[Subspace, Subspace, Subspace]:
    """Subspaces E1, E2 of C^n (dims d1, d2) meeting exactly in a random k-dim subspace.

    Needs (d1 - k) + (d2 - k) <= n - k so the non-shared parts can be independent.
    """
    if not (0 <= k <= min(d1, d2) and (d1 - k) + (d2 - k) <= n - k):
        raise ValueError(f"cannot plant dims ({d1}, {d2}, {k}) in C^{n}")
    Q = random_unitary(n, rng)
    common = Q[:, :k]
    rest = Q[:, k:]
    # generic frames in the complement of the common part, not orthogonal to each other
    A = rest @ complex_normal(rng, (n - k, d1 - k))
    B = rest @ complex_normal(rng, (n - k, d2 - k))
    return Subspace.span(np.hstack([common, A])), Subspace.span(np.hstack([common, B])), Subspace(common)
