"""Galerkin matrices of the mixed forms in the plane-wave basis.

Unknowns are ordered X = (u1 | u2 | p | s) with per-mode 3-vectors for u1
and u2 (component-fastest), one coefficient per mode for p and a single
constant s, so dim = 7m + 1. Rows are test functions (v1 | v2 | q | t) and
entry [row, col] is form(trial=col, test=row).

The linearized pencil is A X = -eta C X with

    A = | K0 - w^2 I   N^H E S    B1   0  |    C = | S^H E N   S^H E S   B2  0 |
        | 0            M I        0    0  |        | -M I      0         0   0 |
        | B1^H         0          0    e0 |        | B2^H      0         0   0 |
        | e0^T         0          0    0  |        | 0         0         0   0 |

where E is the convolution by the Fourier coefficients of 1/eps,
K0 = N^H E N, S = i [alpha_hat]_x, B1 = i gamma_I (mode-diagonal),
B2 = i alpha_hat and e0 picks the zero mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MissingCoefficient
from .lattice import PlaneWaveSet, WaveVectorSplit, cross_matrix, curl_matrix, gammas
from .materials import InvEpsilonTable


def _check_table(basis: PlaneWaveSet, inv_eps: InvEpsilonTable) -> None:
    if inv_eps.order < basis.order:
        raise MissingCoefficient(
            f"table order {inv_eps.order} cannot cover differences of basis order {basis.order}"
        )


def convolution_matrix(basis: PlaneWaveSet, inv_eps: InvEpsilonTable) -> np.ndarray:
    """E[I', I] = c(I' - I)."""
    _check_table(basis, inv_eps)
    diffs = basis.indices[:, None, :] - basis.indices[None, :, :]
    return inv_eps.gather(diffs)


def _sandwich(left: np.ndarray, conv: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Block matrix with (I', I) block = left[I'] * conv[I', I] * right[I]."""
    m = conv.shape[0]
    out = np.einsum("pab,pq,qbc->paqc", left, conv, right, optimize=True)
    return out.reshape(3 * m, 3 * m)


def alpha_cross(alpha_hat) -> np.ndarray:
    """S = i [alpha_hat]_x, the symbol of v -> i alpha_hat x v."""
    return 1j * cross_matrix(np.asarray(alpha_hat, dtype=float))


def assemble_a1(basis, split: WaveVectorSplit, omega: float, M: float, inv_eps) -> dict:
    m = len(basis)
    conv = convolution_matrix(basis, inv_eps)
    N = curl_matrix(gammas(basis, split.beta))
    NH = np.conj(np.swapaxes(N, -1, -2))
    S = np.broadcast_to(alpha_cross(split.alpha_hat), (m, 3, 3))
    eye = np.eye(3 * m)
    return {
        ("v1", "u1"): _sandwich(NH, conv, N) - omega**2 * eye,
        ("v1", "u2"): _sandwich(NH, conv, S),
        ("v2", "u2"): M * eye,
    }


def assemble_a2(basis, split: WaveVectorSplit, M: float, inv_eps) -> dict:
    m = len(basis)
    conv = convolution_matrix(basis, inv_eps)
    N = curl_matrix(gammas(basis, split.beta))
    S = np.broadcast_to(alpha_cross(split.alpha_hat), (m, 3, 3))
    SH = np.conj(np.swapaxes(S, -1, -2))
    return {
        ("v1", "u2"): _sandwich(SH, conv, S),
        ("v1", "u1"): _sandwich(SH, conv, N),
        ("v2", "u1"): -M * np.eye(3 * m),
    }


def _mode_diagonal_column(vectors: np.ndarray) -> np.ndarray:
    """(3m, m) matrix whose column I holds vectors[I] in rows 3I..3I+2."""
    m = vectors.shape[0]
    out = np.zeros((3 * m, m), dtype=complex)
    rows = np.arange(3 * m)
    out[rows, rows // 3] = vectors.reshape(-1)
    return out


def assemble_b1(basis, split: WaveVectorSplit) -> np.ndarray:
    return _mode_diagonal_column(1j * gammas(basis, split.beta))


def assemble_b2(basis, alpha_hat) -> np.ndarray:
    ah = np.asarray(alpha_hat, dtype=float)
    return _mode_diagonal_column(np.tile(1j * ah, (len(basis), 1)))


def assemble_c1(basis) -> np.ndarray:
    """Coupling of the constant multiplier with mode coefficients: e0 (length m).

    (q, s) = conj(q_0) s on the unit cell, so only the zero mode couples.
    """
    e0 = np.zeros(len(basis), dtype=complex)
    e0[basis.zero_position] = 1.0
    return e0


@dataclass
class FieldCoefficients:
    u1: np.ndarray
    u2: np.ndarray
    p: np.ndarray
    s: complex

    @classmethod
    def from_vector(cls, X, m: int) -> "FieldCoefficients":
        X = np.asarray(X)
        return cls(
            u1=X[: 3 * m].reshape(m, 3),
            u2=X[3 * m : 6 * m].reshape(m, 3),
            p=X[6 * m : 7 * m],
            s=complex(X[7 * m]),
        )

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.u1.ravel(), self.u2.ravel(), self.p, [self.s]])


@dataclass(frozen=True)
class MixedBlockSystem:
    A: np.ndarray
    C: np.ndarray
    m: int
    split: WaveVectorSplit
    omega: float
    M: float
    order: int
    model_id: str = ""

    @property
    def dim(self) -> int:
        return 7 * self.m + 1

    @property
    def u1(self) -> slice:
        return slice(0, 3 * self.m)

    @property
    def u2(self) -> slice:
        return slice(3 * self.m, 6 * self.m)

    @property
    def p(self) -> slice:
        return slice(6 * self.m, 7 * self.m)

    @property
    def s(self) -> int:
        return 7 * self.m

    def fields(self, X) -> FieldCoefficients:
        return FieldCoefficients.from_vector(X, self.m)


def build_linearized_system(
    basis: PlaneWaveSet,
    split: WaveVectorSplit,
    omega: float,
    M: float,
    inv_eps: InvEpsilonTable,
    model_id: str = "",
) -> MixedBlockSystem:
    m = len(basis)
    a1 = assemble_a1(basis, split, omega, M, inv_eps)
    a2 = assemble_a2(basis, split, M, inv_eps)
    b1 = assemble_b1(basis, split)
    b2 = assemble_b2(basis, split.alpha_hat)
    e0 = assemble_c1(basis)

    n = 7 * m + 1
    U1, U2, P, S = slice(0, 3 * m), slice(3 * m, 6 * m), slice(6 * m, 7 * m), 7 * m
    A = np.zeros((n, n), dtype=complex)
    C = np.zeros((n, n), dtype=complex)

    A[U1, U1] = a1["v1", "u1"]
    A[U1, U2] = a1["v1", "u2"]
    A[U2, U2] = a1["v2", "u2"]
    A[U1, P] = b1
    A[P, U1] = b1.conj().T
    A[S, P] = e0  # (p, t): row t, column p_0
    A[P, S] = e0  # conj((q, s)): row q_0, column s

    C[U1, U1] = a2["v1", "u1"]
    C[U1, U2] = a2["v1", "u2"]
    C[U2, U1] = a2["v2", "u1"]
    C[U1, P] = b2
    C[P, U1] = b2.conj().T

    return MixedBlockSystem(
        A=A, C=C, m=m, split=split, omega=float(omega), M=float(M), order=basis.order, model_id=model_id
    )


def assemble_quadratic(
    basis: PlaneWaveSet, split: WaveVectorSplit, omega: float, inv_eps: InvEpsilonTable, eta: complex
) -> np.ndarray:
    """Q(eta) acting on (u | p | s), built directly from the complex wave vector.

    Uses k_I = beta + eta*alpha_hat + I throughout (curl_k, grad_k, div_k),
    without going through the linearized blocks. Size 4m + 1.
    """
    m = len(basis)
    conv = convolution_matrix(basis, inv_eps)
    k = gammas(basis, split.beta) + eta * np.asarray(split.alpha_hat)[None, :]
    Nk = 1j * cross_matrix(k)
    n = 4 * m + 1
    Q = np.zeros((n, n), dtype=complex)
    U, P, S = slice(0, 3 * m), slice(3 * m, 4 * m), 4 * m
    # the test-side curl_k symbol equals Nk itself (analytic in eta, no conjugation)
    Q[U, U] = _sandwich(Nk, conv, Nk) - omega**2 * np.eye(3 * m)
    grad = _mode_diagonal_column(1j * k)
    Q[U, P] = grad
    Q[P, U] = -grad.T  # div_k u tested against conj(q): -i k_I . u_I
    e0 = assemble_c1(basis)
    Q[S, P] = e0
    Q[P, S] = e0
    return Q
