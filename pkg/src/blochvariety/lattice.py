"""Truncated plane-wave basis on the unit cube and the per-mode algebra of the
shifted operators curl_beta, div_beta and grad_beta.

A periodic field is represented by coefficients C_I in

    w(x) = sum_I exp(i I.x) C_I,    I = 2*pi*(i1, i2, i3),

and the shifted operators act mode-diagonally through gamma_I = beta + I:

    curl_beta w  <->  N_I C_I,  N_I = i [gamma_I]_x
    grad_beta p  <->  i gamma_I p_I
    div_beta w   <->  i gamma_I . C_I
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import ZeroVector

TWO_PI = 2.0 * np.pi
ZERO_TOL = 1e-12
_BZ_SLACK = 1e-12


@dataclass(frozen=True)
class PlaneWaveSet:
    """All modes I = 2*pi*(i1, i2, i3) with |i_j| <= order, lexicographic."""

    order: int
    indices: np.ndarray = field(repr=False)
    mode_index: dict = field(repr=False, compare=False)

    @property
    def modes(self) -> np.ndarray:
        return TWO_PI * self.indices

    @property
    def zero_position(self) -> int:
        return self.mode_index[(0, 0, 0)]

    def __len__(self) -> int:
        return self.indices.shape[0]


def build_index_set(order: int) -> PlaneWaveSet:
    if order < 0:
        raise ValueError(f"order must be nonnegative, got {order}")
    rng = range(-order, order + 1)
    idx = np.array(list(product(rng, rng, rng)), dtype=np.int64).reshape(-1, 3)
    idx.setflags(write=False)
    lookup = {tuple(int(v) for v in row): n for n, row in enumerate(idx)}
    return PlaneWaveSet(order=order, indices=idx, mode_index=lookup)


@dataclass(frozen=True)
class WaveVectorSplit:
    """k = beta + eta * alpha_hat with beta = alpha0 + tau * alpha_hat.

    ``beta`` must lie in the first Brillouin zone [-pi, pi]^3.
    """

    alpha0: tuple
    alpha_hat: tuple
    tau: float

    def __post_init__(self):
        a0 = np.asarray(self.alpha0, dtype=float)
        ah = np.asarray(self.alpha_hat, dtype=float)
        if a0.shape != (3,) or ah.shape != (3,):
            raise ValueError("alpha0 and alpha_hat must be 3-vectors")
        if abs(np.linalg.norm(ah) - 1.0) > 1e-12:
            raise ValueError(f"alpha_hat must be a unit vector, |alpha_hat|={np.linalg.norm(ah)!r}")
        object.__setattr__(self, "alpha0", tuple(float(v) for v in a0))
        object.__setattr__(self, "alpha_hat", tuple(float(v) for v in ah))
        object.__setattr__(self, "tau", float(self.tau))
        if np.any(np.abs(self.beta) > np.pi + _BZ_SLACK):
            raise ValueError(f"beta={self.beta} is outside the first Brillouin zone")

    @property
    def beta(self) -> np.ndarray:
        return np.asarray(self.alpha0) + self.tau * np.asarray(self.alpha_hat)

    def wavevector(self, eta: complex) -> np.ndarray:
        """Bloch wave vector k = beta + eta * alpha_hat (complex when eta is)."""
        return self.beta + eta * np.asarray(self.alpha_hat)

    def with_tau(self, tau: float) -> "WaveVectorSplit":
        return WaveVectorSplit(self.alpha0, self.alpha_hat, tau)


@dataclass(frozen=True)
class ModeAlgebra:
    gamma: np.ndarray
    curl_mat: np.ndarray
    pol: tuple | None


def gamma_of(split: WaveVectorSplit, mode) -> np.ndarray:
    return split.beta + np.asarray(mode, dtype=float)


def gammas(basis: PlaneWaveSet, beta) -> np.ndarray:
    """gamma_I for every mode of ``basis``, shape (m, 3)."""
    return np.asarray(beta, dtype=float)[None, :] + basis.modes


def cross_matrix(v) -> np.ndarray:
    """Matrix [v]_x with [v]_x w = v x w (complex entries allowed)."""
    v = np.asarray(v)
    z = np.zeros_like(v[..., 0])
    return np.stack(
        [
            np.stack([z, -v[..., 2], v[..., 1]], axis=-1),
            np.stack([v[..., 2], z, -v[..., 0]], axis=-1),
            np.stack([-v[..., 1], v[..., 0], z], axis=-1),
        ],
        axis=-2,
    )


def curl_matrix(gamma) -> np.ndarray:
    """N = i [gamma]_x. Broadcasts over leading axes of ``gamma``."""
    return 1j * cross_matrix(np.asarray(gamma, dtype=float))


def polarization_basis(gamma) -> tuple[np.ndarray, np.ndarray]:
    """Two real unit vectors e1, e2 with {e1, e2, gamma/|gamma|} orthonormal.

    e1 comes from Gram-Schmidt on the coordinate axis least aligned with
    gamma (ties go to the lowest axis index); e2 = g_hat x e1.
    """
    g = np.asarray(gamma, dtype=float)
    norm = np.linalg.norm(g)
    if norm <= ZERO_TOL:
        raise ZeroVector(f"polarization undefined for |gamma|={norm!r}")
    ghat = g / norm
    axis = int(np.argmin(np.abs(ghat)))
    e = np.zeros(3)
    e[axis] = 1.0
    e1 = e - ghat[axis] * ghat
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(ghat, e1)
    e2 /= np.linalg.norm(e2)
    return e1, e2


def mode_algebra(split: WaveVectorSplit, mode) -> ModeAlgebra:
    g = gamma_of(split, mode)
    pol = polarization_basis(g) if np.linalg.norm(g) > ZERO_TOL else None
    return ModeAlgebra(gamma=g, curl_mat=curl_matrix(g), pol=pol)


def helmholtz_split(coeffs, split: WaveVectorSplit, basis: PlaneWaveSet):
    """Split per-mode coefficients into transverse and gradient parts.

    Per mode the gradient part is (gamma.C / |gamma|^2) gamma and the
    transverse part is the remainder, so gamma . transverse = 0.
    """
    C = np.asarray(coeffs, dtype=complex).reshape(len(basis), 3)
    g = gammas(basis, split.beta)
    g2 = np.einsum("ij,ij->i", g, g)
    if np.any(g2 <= ZERO_TOL**2):
        raise ZeroVector("helmholtz_split needs gamma_I != 0 for every mode (beta != 0)")
    proj = np.einsum("ij,ij->i", g, C) / g2
    grad = proj[:, None] * g
    return C - grad, grad


def min_gamma_sq_over_lattice(beta) -> float:
    """min over all I in 2*pi*Z^3 of |beta + I|^2, exact per coordinate."""
    b = np.asarray(beta, dtype=float)
    d = b - TWO_PI * np.round(b / TWO_PI)
    return float(np.dot(d, d))
