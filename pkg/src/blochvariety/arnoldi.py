"""Restarted Arnoldi iteration for the largest-magnitude eigenvalues of an operator.

The basis is kept orthonormal with modified Gram-Schmidt plus one
re-orthogonalization pass. Restarts keep the wanted part of a sorted Schur
form of the Hessenberg matrix (Krylov-Schur), so no shifts need choosing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .errors import ArnoldiNoConvergence


@dataclass
class ArnoldiResult:
    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    converged: np.ndarray
    restarts: int
    invariant: bool = False

    @property
    def n_converged(self) -> int:
        return int(np.count_nonzero(self.converged))


def _mgs(V: np.ndarray, w: np.ndarray, ncols: int) -> tuple[np.ndarray, np.ndarray]:
    h = np.zeros(ncols, dtype=complex)
    for _ in range(2):
        for i in range(ncols):
            c = np.vdot(V[:, i], w)
            w = w - c * V[:, i]
            h[i] += c
    return w, h


def arnoldi(
    apply: Callable[[np.ndarray], np.ndarray],
    dim: int,
    m: int | None = None,
    nev: int = 6,
    tol: float = 1e-12,
    max_restarts: int = 300,
    seed: int = 0,
    v0: np.ndarray | None = None,
    raise_on_failure: bool = True,
) -> ArnoldiResult:
    """Compute the ``nev`` largest-magnitude Ritz pairs of ``apply``.

    A Ritz pair (theta, y) counts as converged when its residual estimate is
    at most ``tol * |theta|``. Zero Ritz values never count as converged, so
    asking for more values than the operator's rank returns what exists with
    the rest flagged.

    Raises:
        ArnoldiNoConvergence: restarts exhausted before all wanted values
            converged (the partial result rides on the exception).
    """
    if m is None:
        m = max(2 * nev + 1, 20)
    m = min(m, dim)
    if not (m > nev >= 1):
        raise ValueError(f"need subspace size m > nev >= 1, got m={m}, nev={nev}")

    rng = np.random.default_rng(seed)
    V = np.zeros((dim, m + 1), dtype=complex)
    H = np.zeros((m + 1, m), dtype=complex)
    v = np.asarray(v0, dtype=complex) if v0 is not None else rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    V[:, 0] = v / np.linalg.norm(v)

    k = 0
    restarts = 0
    while True:
        size = m
        invariant = False
        for j in range(k, m):
            w, h = _mgs(V, apply(V[:, j]), j + 1)
            H[: j + 1, j] = h
            beta = np.linalg.norm(w)
            H[j + 1, j] = beta
            if beta <= 1e-13 * max(np.linalg.norm(h), 1e-300):
                size = j + 1
                invariant = True
                H[j + 1, j] = 0.0
                break
            V[:, j + 1] = w / beta

        Hm = H[:size, :size]
        theta, Y = sla.eig(Hm)
        Y = Y / np.linalg.norm(Y, axis=0)
        est = np.abs(H[size, size - 1]) * np.abs(Y[size - 1, :])
        order = np.argsort(-np.abs(theta), kind="stable")
        wanted = order[: min(nev, size)]
        scale = np.max(np.abs(theta)) if theta.size else 0.0
        nonzero = np.abs(theta) > 1e-12 * scale
        conv = (est <= tol * np.abs(theta)) & nonzero

        if invariant or np.all(conv[wanted]) or restarts >= max_restarts:
            X = V[:, :size] @ Y[:, wanted]
            vals = theta[wanted]
            true_res = np.array(
                [np.linalg.norm(apply(X[:, i]) - vals[i] * X[:, i]) for i in range(len(wanted))]
            )
            result = ArnoldiResult(
                values=vals,
                vectors=X,
                residuals=true_res,
                converged=conv[wanted],
                restarts=restarts,
                invariant=invariant,
            )
            if not invariant and not np.all(conv[wanted]) and raise_on_failure:
                raise ArnoldiNoConvergence(result.n_converged, result)
            return result

        keep = min(nev + (m - nev) // 2, m - 1)
        thresh = np.abs(theta[order[keep - 1]]) * (1.0 - 1e-10)
        T, Z, sdim = sla.schur(Hm, output="complex", sort=lambda x: abs(x) >= thresh)
        keep = max(min(sdim, m - 1), nev)
        resid_row = H[m, m - 1] * Z[m - 1, :keep]
        V[:, :keep] = V[:, :m] @ Z[:, :keep]
        V[:, keep] = V[:, m]
        H[:] = 0.0
        H[:keep, :keep] = np.triu(T[:keep, :keep])
        H[keep, :keep] = resid_row
        k = keep
        restarts += 1
