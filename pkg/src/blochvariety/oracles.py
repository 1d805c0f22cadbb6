"""Independent reference computations used by the tests and the ``validate`` command.

Nothing in the solver path imports this module.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DimensionTooLarge, NotFrequencyIndependent
from .lattice import PlaneWaveSet, WaveVectorSplit, build_index_set, gammas

DENSE_ORACLE_MAX = 500


def _merge(values, tol: float) -> list[tuple]:
    """Group values closer than tol (relative to max(1, |v|)), each entry counted twice."""
    out: list[list] = []
    for v in values:
        for entry in out:
            if abs(entry[0] - v) <= tol * max(1.0, abs(v)):
                entry[1] += 2
                break
        else:
            out.append([v, 2])
    return [(e[0], e[1]) for e in out]


def analytic_omegas(eps: float, k, basis: PlaneWaveSet, tol: float = 1e-12) -> list[tuple[float, int]]:
    """Plane-wave frequencies |k + I| / sqrt(eps), two polarizations each, merged and sorted."""
    g = gammas(basis, np.asarray(k, dtype=float))
    w = np.sort(np.linalg.norm(g, axis=1) / math.sqrt(eps))
    return _merge([float(x) for x in w], tol)


def analytic_etas(eps: float, omega: float, split: WaveVectorSplit, basis: PlaneWaveSet, tol: float = 1e-12):
    """Roots of eta^2 + 2 eta (alpha_hat . gamma_I) + |gamma_I|^2 - eps omega^2 = 0 for every mode.

    Each root carries multiplicity 2; coincident roots are merged. Sorted by
    (|Im eta|, Re eta).
    """
    g = gammas(basis, split.beta)
    ah = np.asarray(split.alpha_hat)
    a = g @ ah
    c = np.einsum("ij,ij->i", g, g) - eps * omega**2
    disc = np.sqrt((a * a - c).astype(complex))
    roots = np.concatenate([-a + disc, -a - disc])
    roots = roots[np.lexsort((roots.real, np.round(np.abs(roots.imag), 10)))]
    return _merge([complex(r) for r in roots], tol)


@dataclass
class DenseSpectrum:
    eta: np.ndarray  # inf where the eigenvalue is infinite
    vectors: np.ndarray = field(repr=False)

    @property
    def finite(self) -> np.ndarray:
        return self.eta[np.isfinite(self.eta)]


def dense_generalized_eig(A, C, inf_tol: float = 1e-12) -> DenseSpectrum:
    """All eta with A X = -eta C X by QZ; infinite ones are reported as inf."""
    A = np.asarray(A, dtype=complex)
    C = np.asarray(C, dtype=complex)
    if A.shape[0] > DENSE_ORACLE_MAX:
        raise DimensionTooLarge(f"dense oracle limited to dim <= {DENSE_ORACLE_MAX}, got {A.shape[0]}")
    (al, be), V = sla.eig(A, -C, homogeneous_eigvals=True)
    na = max(np.linalg.norm(A), 1e-300)
    nc = max(np.linalg.norm(C), 1e-300)
    infinite = np.abs(be) * na <= inf_tol * np.abs(al) * nc
    with np.errstate(divide="ignore", invalid="ignore"):
        eta = np.where(infinite, np.inf, al / np.where(infinite, 1.0, be))
    return DenseSpectrum(eta=eta.astype(complex), vectors=V)


@dataclass
class ConsistencyEntry:
    alpha: float
    band: int
    omega: float
    deviation: float


@dataclass
class ConsistencyReport:
    entries: list

    @property
    def max_deviation(self) -> float:
        return max((e.deviation for e in self.entries), default=math.nan)


def cross_consistency_report(
    model,
    basis: PlaneWaveSet,
    k_samples,
    nev: int = 3,
    grid: int = 32,
    method: str = "auto",
    qnev: int = 12,
) -> ConsistencyReport:
    """Standard solve at each path sample, then the quadratic solve at each resulting omega.

    ``k_samples`` are path parameters alpha in (0, 3 pi]. The deviation for a
    band is min |k_computed - k|_inf over accepted real pairs.
    """
    from .eigensolvers import solve_quadratic_eta, solve_standard
    from .materials import inv_epsilon_fourier
    from .sweeps import DEFAULT_SEGMENTS, path_wavevector, select_tau

    if model.dispersive:
        raise NotFrequencyIndependent(f"{model.model_id} depends on omega")
    table = inv_epsilon_fourier(model, 0.0, basis.order, grid)
    entries = []
    for alpha in k_samples:
        k = path_wavevector(alpha)
        s = min(int(alpha // math.pi), 2) if alpha > 0 else 0
        if s > 0 and alpha == s * math.pi:
            s -= 1
        seg = DEFAULT_SEGMENTS[s]
        lam = alpha - seg.offset
        for b, mode in enumerate(solve_standard(k, model, basis, nev=nev, inv_eps=table)):
            tau, _ = select_tau(seg.alpha0, seg.alpha_hat, mode.omega, model)
            split = WaveVectorSplit(seg.alpha0, seg.alpha_hat, tau)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                pairs = solve_quadratic_eta(
                    mode.omega, split, model, basis, nev=qnev, method=method, shift=lam - tau, inv_eps=table
                )
            good = [p for p in pairs if p.accepted]
            dev = min((float(np.max(np.abs(p.k - k))) for p in good), default=math.inf)
            entries.append(ConsistencyEntry(alpha=float(alpha), band=b, omega=mode.omega, deviation=dev))
    return ConsistencyReport(entries)


# --------------------------------------------------------------------------
# validate suite
# --------------------------------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float


def _match_multiset(found, expected, tol):
    """Largest relative distance from any expected root (with multiplicity) to the found list."""
    pool = list(found)
    worst = 0.0
    for val, mult in expected:
        for _ in range(mult):
            if not pool:
                return math.inf
            d = [abs(p - val) / max(1.0, abs(val)) for p in pool]
            j = int(np.argmin(d))
            worst = max(worst, d[j])
            pool.pop(j)
    return worst if not pool else max(worst, math.inf)


def run_validation(order: int = 1) -> list[Check]:
    """Oracle checks on small systems; returns one Check per property."""
    from .eigensolvers import check_admissibility, solve_quadratic_eta, solve_standard
    from .forms import build_linearized_system
    from .materials import Homogeneous, inv_epsilon_fourier, scaffold_rods
    from .eigensolvers import ShiftInvert
    from .arnoldi import arnoldi

    checks = []
    basis = build_index_set(order)
    k = (math.pi / 2, 0.0, 0.0)

    exact = analytic_omegas(1.0, k, basis)
    got = [m.omega for m in solve_standard(k, Homogeneous(1.0), basis, nev=4)]
    want = [exact[0][0]] * 2 + [exact[1][0]] * 2
    err = max(abs(g - w) / w for g, w in zip(got, want))
    checks.append(Check("standard vs analytic omegas (eps=1)", err <= 1e-10, err, 1e-10))

    got4 = [m.omega for m in solve_standard(k, Homogeneous(4.0), basis, nev=4)]
    err = max(abs(2 * a - b) / b for a, b in zip(got4, got))
    checks.append(Check("eps=4 halves every omega", err <= 1e-10, err, 1e-10))

    split = WaveVectorSplit((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), math.pi)
    omega = math.pi / 2
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pairs = solve_quadratic_eta(omega, split, Homogeneous(1.0), basis, method="dense")
    acc = [p.eta for p in pairs if p.accepted]
    err = _match_multiset(acc, analytic_etas(1.0, omega, split, basis), 1e-8)
    checks.append(Check("dense quadratic vs analytic etas (eps=1)", err <= 1e-8, err, 1e-8))

    worst = max(max(p.p_norm, p.s_abs, p.u2_gap) for p in pairs if p.accepted)
    checks.append(Check("multipliers vanish on accepted pairs", worst <= 1e-8, worst, 1e-8))

    rods = scaffold_rods()
    table = inv_epsilon_fourier(rods, 0.9, order, 32)
    sys_ = build_linearized_system(basis, split, 0.9, 1.0, table)
    dense = dense_generalized_eig(sys_.A, sys_.C).finite
    op = ShiftInvert(sys_, -1.0)
    res = arnoldi(op, sys_.dim, m=40, nev=8, tol=1e-12, raise_on_failure=False)
    etas = -1.0 + 1.0 / res.values[res.converged]
    err = max((np.min(np.abs(dense - e)) / abs(e) for e in etas), default=math.inf)
    checks.append(Check("arnoldi Ritz values vs dense pencil (rods)", err <= 1e-8, err, 1e-8))

    rep = cross_consistency_report(Homogeneous(1.0), basis, [math.pi / 3, 1.5 * math.pi, 2.5 * math.pi], nev=2)
    checks.append(Check("standard/quadratic round trip (eps=1)", rep.max_deviation <= 1e-10, rep.max_deviation, 1e-10))

    cases = [((0.0, 0.0, 0.0), math.pi, math.pi**2), ((math.pi, 0.0, 0.0), 0.0, math.pi**2),
             ((math.pi, math.pi, 0.0), 0.0, 2 * math.pi**2)]
    err = 0.0
    for a0, tau, thr in cases:
        r = check_admissibility(WaveVectorSplit(a0, (1.0, 0.0, 0.0) if a0[1] == 0 else (0.0, 0.0, 1.0), tau),
                                0.0, Homogeneous(1.0))
        err = max(err, abs(r.min_gamma_sq - thr))
    checks.append(Check("admissibility thresholds (three closed-form cases)", err == 0.0, err, 0.0))
    return checks
