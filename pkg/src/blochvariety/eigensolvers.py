"""Band solvers.

* ``solve_standard``: fix a real k, solve for omega^2 on the per-mode
  divergence-free subspace (Hermitian eigenproblem).
* ``solve_quadratic_eta``: fix omega, solve the linearized pencil
  A X = -eta C X for eta, either by dense QZ or by shift-invert Arnoldi on
  x -> -(A + shift C)^{-1} C x whose eigenvalues are mu = 1/(eta - shift).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .arnoldi import arnoldi
from .errors import (
    ArnoldiNoConvergence,
    EigenFailure,
    NotAdmissible,
    NotAVector,
    NotFrequencyIndependent,
    SingularA,
    SingularFactor,
)
from .forms import FieldCoefficients, MixedBlockSystem, build_linearized_system, convolution_matrix
from .lattice import (
    TWO_PI,
    PlaneWaveSet,
    WaveVectorSplit,
    curl_matrix,
    gammas,
    min_gamma_sq_over_lattice,
    polarization_basis,
)
from .materials import InvEpsilonTable, PermittivityModel, inv_epsilon_fourier

PIVOT_TOL = 1e-13
MU_CUTOFF = 1e-10
TAU_NUDGE = 1e-3
DENSE_MAX_DIM = 400
SHIFT_NUDGE = 1e-3


# --------------------------------------------------------------------------
# admissibility
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AdmissibilityReport:
    ok: bool
    margin: float
    inf_re_inv_eps: float
    min_gamma_sq: float
    limiting_mode: tuple
    case_label: str
    omega: float


def classify_case(alpha0, tau: float) -> str:
    """Which closed-form lower bound on |beta + I|^2 applies."""
    a = np.abs(np.asarray(alpha0, dtype=float))
    if np.all(a == 0.0):
        return "a"
    n_pi = int(np.count_nonzero(np.isclose(a, math.pi, rtol=0, atol=1e-14)))
    n_zero = int(np.count_nonzero(a == 0.0))
    if tau == 0.0 and n_pi == 1 and n_zero == 2:
        return "b"
    if tau == 0.0 and n_pi == 2 and n_zero == 1:
        return "c"
    return "general"


def closed_form_bound(case: str, tau: float = 0.0) -> float:
    """Lower bound for min_I |gamma_I|^2 in the three named cases."""
    if case == "a":
        return min((TWO_PI - abs(tau)) ** 2, tau**2)
    if case == "b":
        return math.pi**2
    if case == "c":
        return 2 * math.pi**2
    raise ValueError(f"no closed-form bound for case {case!r}")


def _sample_points(n_side: int = 16) -> np.ndarray:
    g = (np.arange(n_side) + 0.5) / n_side
    return np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1).reshape(-1, 3)


def inf_re_inv_eps(model: PermittivityModel, omega: float) -> float:
    """inf_x |Re 1/eps(x, omega)| over 4096 cell samples and every region value."""
    vals = np.concatenate([model.eval(_sample_points(), omega).ravel(), np.asarray(model.region_values(omega))])
    return float(np.min(np.abs(np.real(1.0 / vals))))


def check_admissibility(
    split: WaveVectorSplit, omega: float, model: PermittivityModel, basis: PlaneWaveSet | None = None
) -> AdmissibilityReport:
    """Coercivity margin inf|Re 1/eps| * min_I |beta + I|^2 - omega^2 over all of Z^3."""
    beta = split.beta
    if np.linalg.norm(beta) == 0.0:
        from .errors import ZeroVector

        raise ZeroVector("admissibility requires beta != 0")
    inf_inv = inf_re_inv_eps(model, omega)
    g2 = min_gamma_sq_over_lattice(beta)
    margin = inf_inv * g2 - omega**2
    limiting = tuple(int(v) for v in -np.round(beta / TWO_PI))
    return AdmissibilityReport(
        ok=bool(margin > 0),
        margin=float(margin),
        inf_re_inv_eps=inf_inv,
        min_gamma_sq=g2,
        limiting_mode=limiting,
        case_label=classify_case(split.alpha0, split.tau),
        omega=float(omega),
    )


# --------------------------------------------------------------------------
# standard problem: fix k, find omega^2
# --------------------------------------------------------------------------


@dataclass
class StandardMode:
    omega2: float
    vector: np.ndarray = field(repr=False)

    @property
    def omega(self) -> float:
        return math.sqrt(max(self.omega2, 0.0))


def polarization_matrix(g: np.ndarray) -> np.ndarray:
    """(3m, 2m) block-diagonal matrix of per-mode transverse unit vectors."""
    m = g.shape[0]
    P = np.zeros((3 * m, 2 * m))
    for i in range(m):
        e1, e2 = polarization_basis(g[i])
        P[3 * i : 3 * i + 3, 2 * i] = e1
        P[3 * i : 3 * i + 3, 2 * i + 1] = e2
    return P


def standard_operator(k, basis: PlaneWaveSet, inv_eps: InvEpsilonTable) -> np.ndarray:
    """Reduced curl-curl matrix P^H N^H E N P on the transverse subspace."""
    g = gammas(basis, k)
    conv = convolution_matrix(basis, inv_eps)
    N = curl_matrix(g)
    NH = np.conj(np.swapaxes(N, -1, -2))
    m = len(basis)
    K0 = np.einsum("pab,pq,qbc->paqc", NH, conv, N, optimize=True).reshape(3 * m, 3 * m)
    P = polarization_matrix(g)
    return P.T @ K0 @ P, P


def solve_standard(
    k,
    model: PermittivityModel,
    basis: PlaneWaveSet,
    nev: int = 6,
    grid: int = 32,
    freeze_omega: float | None = None,
    inv_eps: InvEpsilonTable | None = None,
    tol: float = 1e-10,
) -> list[StandardMode]:
    """Lowest ``nev`` values of omega^2 at the real wave vector ``k``."""
    if model.dispersive:
        if freeze_omega is None:
            raise NotFrequencyIndependent(f"{model.model_id} depends on omega; pass freeze_omega")
        model = model.frozen(freeze_omega)
    if inv_eps is None:
        inv_eps = inv_epsilon_fourier(model, 0.0 if freeze_omega is None else freeze_omega, basis.order, grid)
    H, P = standard_operator(np.asarray(k, dtype=float), basis, inv_eps)
    skew = np.linalg.norm(H - H.conj().T)
    if skew > 1e-12 * max(np.linalg.norm(H), 1.0):
        raise EigenFailure(f"reduced operator is not Hermitian (|H - H^H| = {skew:.3e})")
    H = 0.5 * (H + H.conj().T)
    try:
        w, Y = sla.eigh(H)
    except sla.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    scale = max(float(np.max(np.abs(w))), 1.0)
    keep = np.nonzero(w >= -tol * scale)[0][:nev]
    return [StandardMode(omega2=float(w[i]), vector=P @ Y[:, i]) for i in keep]


# --------------------------------------------------------------------------
# quadratic problem: fix omega, find eta
# --------------------------------------------------------------------------


@dataclass
class EtaEigenpair:
    eta: complex
    lam: complex
    k: np.ndarray
    X: FieldCoefficients = field(repr=False)
    residual: float
    p_norm: float
    s_abs: float
    u2_gap: float
    accepted: bool

    @property
    def is_real(self) -> bool:
        return abs(self.lam.imag) <= 1e-6


def residual(system: MixedBlockSystem, eta: complex, X) -> float:
    """||(A + eta C) X|| / ||X||."""
    X = np.asarray(X)
    nx = np.linalg.norm(X)
    if nx == 0.0:
        raise NotAVector("residual of the zero vector is undefined")
    return float(np.linalg.norm(system.A @ X + eta * (system.C @ X)) / nx)


class ShiftInvert:
    """x -> -(A + shift C)^{-1} C x with a cached LU factorization."""

    def __init__(self, system: MixedBlockSystem, shift: complex = 0.0):
        self.system = system
        self.shift = complex(shift)
        mat = system.A + self.shift * system.C
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            self.lu = sla.lu_factor(mat, check_finite=False)
        piv = np.abs(np.diag(self.lu[0]))
        if piv.min() <= PIVOT_TOL * piv.max():
            raise SingularFactor(f"A + shift*C is numerically singular at shift={self.shift}")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return -sla.lu_solve(self.lu, self.system.C @ x, check_finite=False)


def apply_shift_invert(system: MixedBlockSystem, shift: complex, x, factor: ShiftInvert | None = None):
    op = factor if factor is not None else ShiftInvert(system, shift)
    return op(np.asarray(x, dtype=complex))


def _diagnose(system: MixedBlockSystem, eta: complex, X: np.ndarray, res_tol: float, diag_tol: float) -> EtaEigenpair:
    f = system.fields(X)
    nu1 = np.linalg.norm(f.u1)
    if nu1 > 0.0:
        # unit u1, largest u1 entry real-positive: makes output reproducible
        flat = f.u1.ravel()
        j = int(np.argmax(np.abs(flat)))
        X = X * (np.conj(flat[j]) / abs(flat[j])) / nu1
        f = system.fields(X)
    res = residual(system, eta, X)
    norm_u1 = np.linalg.norm(f.u1)
    p_norm = float(np.linalg.norm(f.p) / norm_u1) if norm_u1 > 0 else math.inf
    s_abs = float(abs(f.s) / norm_u1) if norm_u1 > 0 else math.inf
    gap = float(np.linalg.norm(f.u2 - eta * f.u1) / norm_u1) if norm_u1 > 0 else math.inf
    lam = complex(eta) + system.split.tau
    return EtaEigenpair(
        eta=complex(eta),
        lam=lam,
        k=system.split.wavevector(complex(eta)),
        X=f,
        residual=res,
        p_norm=p_norm,
        s_abs=s_abs,
        u2_gap=gap,
        accepted=bool(res <= res_tol and p_norm <= diag_tol and s_abs <= diag_tol and gap <= diag_tol),
    )


def _guard_invertible(system: MixedBlockSystem) -> bool:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, _ = sla.lu_factor(system.A, check_finite=False)
    piv = np.abs(np.diag(lu))
    return bool(piv.min() > PIVOT_TOL * piv.max())


def _nudged_split(split: WaveVectorSplit) -> WaveVectorSplit:
    for delta in (TAU_NUDGE, -TAU_NUDGE):
        try:
            return split.with_tau(split.tau + delta)
        except ValueError:
            continue
    raise SingularA("A is singular and tau cannot be nudged inside the Brillouin zone")


def sort_pairs(pairs: list[EtaEigenpair], shift: complex, im_tol: float = 1e-6) -> list[EtaEigenpair]:
    def key(p):
        im = abs(p.eta.imag)
        return (im > im_tol, im if im > im_tol else 0.0, abs(p.eta - shift))

    return sorted(pairs, key=key)


def solve_quadratic_eta(
    omega: float,
    split: WaveVectorSplit,
    model: PermittivityModel,
    basis: PlaneWaveSet,
    nev: int | None = None,
    method: str = "auto",
    shift: complex = 0.0,
    M: float = 1.0,
    grid: int = 32,
    inv_eps: InvEpsilonTable | None = None,
    strict: bool = False,
    res_tol: float = 1e-8,
    diag_tol: float = 1e-8,
    arnoldi_tol: float = 1e-12,
    subspace: int | None = None,
    max_restarts: int = 300,
    seed: int = 0,
    im_tol: float = 1e-6,
) -> list[EtaEigenpair]:
    """Eigenpairs eta of the linearized pencil at fixed ``omega``.

    ``method`` is "dense" (QZ on the full pencil), "arnoldi" (shift-invert
    around ``shift``) or "auto" (dense up to a few hundred unknowns). Only
    finite eigenvalues are returned; each carries residual and multiplier
    diagnostics plus an ``accepted`` flag.
    """
    report = check_admissibility(split, omega, model, basis)
    if not report.ok:
        msg = f"omega={omega!r} is not admissible for beta={split.beta} (margin {report.margin:.4g})"
        if strict:
            raise NotAdmissible(msg)
        warnings.warn(msg, stacklevel=2)

    if inv_eps is None:
        inv_eps = inv_epsilon_fourier(model, omega, basis.order, grid)
    system = build_linearized_system(basis, split, omega, M, inv_eps, model.model_id)
    if not _guard_invertible(system):
        split = _nudged_split(split)
        warnings.warn(f"A singular at omega={omega!r}; tau moved to {split.tau}", stacklevel=2)
        system = build_linearized_system(basis, split, omega, M, inv_eps, model.model_id)
        if not _guard_invertible(system):
            raise SingularA(f"A remains singular at omega={omega!r}")

    if method == "auto":
        method = "dense" if system.dim <= DENSE_MAX_DIM else "arnoldi"
    shift = complex(shift)

    if method == "dense":
        etas, vecs = _dense_finite(system, shift)
        if nev is not None:
            pick = np.argsort(np.abs(etas - shift), kind="stable")[:nev]
            etas, vecs = etas[pick], vecs[:, pick]
    elif method == "arnoldi":
        etas, vecs = _arnoldi_finite(
            system, shift, nev or 10, arnoldi_tol, subspace, max_restarts, seed
        )
    else:
        raise ValueError(f"unknown method {method!r}")

    pairs = [_diagnose(system, etas[i], vecs[:, i], res_tol, diag_tol) for i in range(len(etas))]
    return sort_pairs(pairs, shift, im_tol)


def _dense_finite(system: MixedBlockSystem, shift: complex):
    try:
        (al, be), V = sla.eig(system.A, -system.C, homogeneous_eigvals=True)
    except sla.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    # |beta| / |(alpha, beta)| is the size of mu in a scale-free form, and
    # stays defined when an eigenvalue sits exactly on the shift
    r = np.abs(be) / np.hypot(np.abs(al), np.abs(be))
    keep = r > MU_CUTOFF * r.max()
    return al[keep] / be[keep], V[:, keep]


def _arnoldi_finite(system, shift, nev, tol, subspace, max_restarts, seed):
    try:
        op = ShiftInvert(system, shift)
    except SingularFactor:
        # the shift is an eigenvalue; step off it
        shift = shift + SHIFT_NUDGE * (1.0 + abs(shift)) * (1 + 1j)
        op = ShiftInvert(system, shift)
    rng = np.random.default_rng(seed)
    start = op(rng.standard_normal(system.dim) + 1j * rng.standard_normal(system.dim))
    m = subspace or max(2 * nev + 10, 40)
    try:
        res = arnoldi(op, system.dim, m=m, nev=nev, tol=tol, max_restarts=max_restarts, seed=seed, v0=start)
    except ArnoldiNoConvergence as exc:
        res = exc.result
        if res is None or res.n_converged == 0:
            raise
        warnings.warn(f"Arnoldi: only {res.n_converged} of {nev} Ritz values converged", stacklevel=3)
    mu = res.values[res.converged]
    X = res.vectors[:, res.converged]
    top = np.max(np.abs(res.values)) if res.values.size else 0.0
    keep = np.abs(mu) > MU_CUTOFF * top
    mu, X = mu[keep], X[:, keep]
    # one more application purges components along infinite-eta directions
    X = np.column_stack([op(X[:, i]) / mu[i] for i in range(X.shape[1])]) if X.shape[1] else X
    return op.shift + 1.0 / mu, X
