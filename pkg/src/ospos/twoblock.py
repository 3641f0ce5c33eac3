"""The model H = H1 + H2, theta = diag(I, -I), H+- = graph(+-C), H0 = H1 + 0."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve

from .errors import NotContraction
from .linalg import TOL_PROJ, TOL_PSD, Subspace, adjoint, opnorm
from .markov import ProjectionTriple
from .reflection import Reflection

COND_WARN = 1e8


@dataclass(frozen=True, eq=False)
class TwoBlockModel:
    C: np.ndarray
    tol: float = TOL_PSD

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.C, dtype=complex))
        C.setflags(write=False)
        object.__setattr__(self, "C", C)
        nrm = opnorm(C)
        if nrm > 1 + self.tol:
            raise NotContraction(f"||C|| = {nrm:.6g} > 1")

    @property
    def n1(self) -> int:
        return self.C.shape[1]

    @property
    def n2(self) -> int:
        return self.C.shape[0]

    @property
    def theta(self) -> Reflection:
        return Reflection.diagonal([1] * self.n1 + [-1] * self.n2)


@dataclass(frozen=True)
class CharProjection:
    matrix: np.ndarray
    condition: float


def _hsolve(M: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, float]:
    cond = float(np.linalg.cond(M)) if M.size else 1.0
    if cond > COND_WARN:
        warnings.warn(f"(1 + C*C) has condition number {cond:.3g}", RuntimeWarning, stacklevel=3)
    return solve(M, B, assume_a="her"), cond


def characteristic_projection(m: TwoBlockModel, sign: int = 1) -> CharProjection:
    """Projection onto graph(sign * C), with the condition number of 1 + C*C."""
    C = sign * m.C
    Ch = adjoint(C)
    R, cond = _hsolve(np.eye(m.n1) + Ch @ C, np.hstack([np.eye(m.n1), Ch]))
    P11, P12 = R[:, : m.n1], R[:, m.n1 :]
    # 1 - (1 + CC*)^-1 = C (1 + C*C)^-1 C*, which avoids cancellation for small C
    P21 = C @ P11
    P22 = C @ P12
    E = np.block([[P11, P12], [P21, P22]])
    return CharProjection((E + adjoint(E)) / 2, cond)


def char_projection_plus(m: TwoBlockModel) -> np.ndarray:
    return characteristic_projection(m, 1).matrix


def char_projection_minus(m: TwoBlockModel) -> np.ndarray:
    return characteristic_projection(m, -1).matrix


def model_triple(m: TwoBlockModel) -> ProjectionTriple:
    n = m.n1 + m.n2
    H0 = Subspace.coordinate(n, range(m.n1))
    return ProjectionTriple(
        H0,
        Subspace.from_projection(char_projection_plus(m)),
        Subspace.from_projection(char_projection_minus(m)),
    )


def markov_residual_blocks(m: TwoBlockModel) -> float:
    """||E+ E0 E- - E+ E-|| evaluated as ||E+ (I - E0) E-||.

    It equals ||C||^2 / (1 + ||C||^2), so it is quadratic in C near zero.
    """
    Ep = char_projection_plus(m)
    Em = char_projection_minus(m)
    return opnorm(Ep[:, m.n1 :] @ Em[m.n1 :, :])


def markov_iff_zero(m: TwoBlockModel, tol: float = TOL_PROJ) -> tuple[bool, float]:
    """(Markov verdict, residual).  The verdict is residual <= tol^2 / (1 + tol^2),
    which is the same as ||C|| <= tol."""
    r = markov_residual_blocks(m)
    return r <= tol**2 / (1 + tol**2), r
