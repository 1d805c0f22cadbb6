"""Brillouin-path sweeps, tau selection, convergence studies and output files."""

from __future__ import annotations

import csv
import json
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .eigensolvers import check_admissibility, solve_quadratic_eta, solve_standard
from .errors import BlochError, NoAdmissibleTau, OutOfRange
from .lattice import PlaneWaveSet, WaveVectorSplit, build_index_set
from .materials import PermittivityModel, inv_epsilon_fourier

PI = math.pi
TAU_SCAN_POINTS = 64
CSV_HEADER = [
    "alpha", "kx", "ky", "kz", "omega_over_2pi", "eta_re", "eta_im", "residual", "p_norm", "s_abs", "flag",
]


@dataclass(frozen=True)
class Segment:
    name: str
    alpha0: tuple
    alpha_hat: tuple
    length: float = PI
    offset: float = 0.0


GAMMA_X = Segment("GX", (0.0, 0.0, 0.0), (1.0, 0.0, 0.0), PI, 0.0)
X_M = Segment("XM", (PI, 0.0, 0.0), (0.0, 1.0, 0.0), PI, PI)
M_R = Segment("MR", (PI, PI, 0.0), (0.0, 0.0, 1.0), PI, 2 * PI)
DEFAULT_SEGMENTS = (GAMMA_X, X_M, M_R)


def path_wavevector(alpha: float) -> np.ndarray:
    """k on the path Gamma -> X -> M -> R parametrized by alpha in [0, 3 pi]."""
    if not 0.0 <= alpha <= 3 * PI:
        raise OutOfRange(f"alpha={alpha!r} outside [0, 3*pi]")
    if alpha <= PI:
        return np.array([alpha, 0.0, 0.0])
    if alpha <= 2 * PI:
        return np.array([PI, alpha - PI, 0.0])
    return np.array([PI, PI, alpha - 2 * PI])


@dataclass
class PathSpec:
    segments: tuple = DEFAULT_SEGMENTS
    samples: int = 10

    def alphas(self, segment: int | None = None) -> list[float]:
        """Sample points per segment: offset + (j+1)/n * length, so Gamma itself is skipped."""
        segs = range(len(self.segments)) if segment is None else [segment]
        out = []
        for s in segs:
            seg = self.segments[s]
            out += [seg.offset + (j + 1) / self.samples * seg.length for j in range(self.samples)]
        return out


@dataclass
class BandPoint:
    alpha: float
    k: tuple
    omega: float
    source: str
    eta: complex | None = None
    residual: float | None = None
    p_norm: float | None = None
    s_abs: float | None = None
    flag: str = "physical"
    segment: int = 0
    band: int = 0

    def row(self) -> list:
        nan = float("nan")
        eta = self.eta if self.eta is not None else complex(nan, nan)
        return [
            float(self.alpha), float(self.k[0]), float(self.k[1]), float(self.k[2]),
            float(self.omega / (2 * PI)), float(eta.real), float(eta.imag),
            nan if self.residual is None else float(self.residual),
            nan if self.p_norm is None else float(self.p_norm),
            nan if self.s_abs is None else float(self.s_abs),
            self.flag,
        ]


# --------------------------------------------------------------------------
# tau selection
# --------------------------------------------------------------------------


def _alpha0_case(alpha0) -> str:
    a = np.abs(np.asarray(alpha0, dtype=float))
    if np.all(a == 0):
        return "a"
    srt = sorted(a)
    if srt[0] == 0 and srt[1] == 0 and math.isclose(srt[2], PI, abs_tol=1e-14):
        return "b"
    if srt[0] == 0 and math.isclose(srt[1], PI, abs_tol=1e-14) and math.isclose(srt[2], PI, abs_tol=1e-14):
        return "c"
    return "general"


def select_tau(alpha0, alpha_hat, omega: float, model: PermittivityModel):
    """(tau, report) with the best admissibility margin; never raises on a bad margin."""
    case = _alpha0_case(alpha0)
    if case == "a":
        candidates = [PI]
    elif case in ("b", "c"):
        candidates = [0.0]
    else:
        candidates = [-PI + 2 * PI * (j + 1) / TAU_SCAN_POINTS for j in range(TAU_SCAN_POINTS)]
    best = None
    for tau in candidates:
        try:
            split = WaveVectorSplit(alpha0, alpha_hat, tau)
        except ValueError:
            continue
        if np.linalg.norm(split.beta) == 0.0:
            continue
        rep = check_admissibility(split, omega, model)
        if best is None or rep.margin > best[1].margin:
            best = (tau, rep)
    if best is None:
        raise NoAdmissibleTau(omega)
    return best


def tau_select(alpha0, alpha_hat, omega: float, model: PermittivityModel) -> float:
    """Regularization shift tau for the split k = alpha0 + (tau + eta) alpha_hat.

    Raises NoAdmissibleTau when no candidate gives a positive margin.
    """
    tau, rep = select_tau(alpha0, alpha_hat, omega, model)
    if not rep.ok:
        raise NoAdmissibleTau(omega)
    return tau


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------


def _pool_map(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def sweep_standard(
    model: PermittivityModel,
    basis: PlaneWaveSet,
    path: PathSpec,
    nbands: int = 6,
    grid: int = 32,
    freeze_omega: float | None = None,
    workers: int = 1,
) -> list[BandPoint]:
    """One standard solve per path sample; returns nbands points per sample."""
    frozen = model.frozen(freeze_omega) if (model.dispersive and freeze_omega is not None) else model
    table = inv_epsilon_fourier(frozen, 0.0 if freeze_omega is None else freeze_omega, basis.order, grid)
    jobs = []
    for s, seg in enumerate(path.segments):
        for a in path.alphas(s):
            jobs.append((s, a))

    def run(job):
        s, a = job
        k = path_wavevector(a)
        modes = solve_standard(k, frozen, basis, nev=nbands, inv_eps=table)
        return [
            BandPoint(alpha=a, k=tuple(k), omega=mode.omega, source="standard", segment=s, band=b)
            for b, mode in enumerate(modes)
        ]

    return [p for chunk in _pool_map(run, jobs, workers) for p in chunk]


def classify_pair(pair, seg: Segment, im_tol: float, path_margin: float, admissible: bool) -> str:
    flags = []
    if abs(pair.lam.imag) > im_tol:
        flags.append("complex")
    elif not (-path_margin <= pair.lam.real <= seg.length + path_margin):
        flags.append("outside")
    if not pair.accepted:
        flags.append("spurious")
    if not admissible:
        flags.append("inadmissible")
    if not flags or flags == ["inadmissible"]:
        flags.insert(0, "physical")
    return ";".join(flags)


def _quadratic_point(model, basis, seg_index, seg, omega, tau_policy, nev, method, grid, M, solve_kw, path_margin):
    try:
        if tau_policy == "auto":
            tau, rep = select_tau(seg.alpha0, seg.alpha_hat, omega, model)
            split = WaveVectorSplit(seg.alpha0, seg.alpha_hat, tau)
        else:
            split = WaveVectorSplit(seg.alpha0, seg.alpha_hat, float(tau_policy))
            rep = check_admissibility(split, omega, model)
        # aim at the middle of the segment window
        shift = seg.length / 2 - split.tau
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            pairs = solve_quadratic_eta(
                omega, split, model, basis, nev=nev, method=method, shift=shift, M=M, grid=grid, **solve_kw
            )
    except BlochError as exc:
        print(f"warning: omega={omega!r} segment {seg.name}: {exc}", file=sys.stderr)
        nan = float("nan")
        return [
            BandPoint(alpha=nan, k=(nan, nan, nan), omega=omega, source="quadratic", flag="failed", segment=seg_index)
        ]
    im_tol = solve_kw.get("im_tol", 1e-6)
    out = []
    for b, pr in enumerate(pairs):
        out.append(
            BandPoint(
                alpha=seg.offset + pr.lam.real,
                k=tuple(float(v) for v in np.real(pr.k)),
                omega=omega,
                source="quadratic",
                eta=pr.eta,
                residual=pr.residual,
                p_norm=pr.p_norm,
                s_abs=pr.s_abs,
                flag=classify_pair(pr, seg, im_tol, path_margin, rep.ok),
                segment=seg_index,
                band=b,
            )
        )
    return out


def sweep_quadratic(
    model: PermittivityModel,
    basis: PlaneWaveSet,
    segment: int,
    omega_grid,
    tau_policy="auto",
    nev: int = 16,
    method: str = "auto",
    grid: int = 32,
    M: float = 1.0,
    path: PathSpec | None = None,
    workers: int = 1,
    path_margin: float = 1e-6,
    **solve_kw,
) -> list[BandPoint]:
    """Fix each omega in ``omega_grid`` and solve for eta along one path segment.

    Every returned pair is emitted with a flag; points whose flag starts with
    "physical" are the real band intersections inside the segment. A failed
    omega produces one row flagged "failed" and the sweep continues.
    "physical;inadmissible" marks a real band point computed where the
    coercivity margin is not positive. Extra keywords (res_tol, diag_tol, im_tol, arnoldi_tol, seed, ...) go to
    ``solve_quadratic_eta``.
    """
    path = path or PathSpec()
    seg = path.segments[segment]

    def run(omega):
        return _quadratic_point(
            model, basis, segment, seg, float(omega), tau_policy, nev, method, grid, M, solve_kw, path_margin
        )

    return [p for chunk in _pool_map(run, list(omega_grid), workers) for p in chunk]


def is_physical(flag: str) -> bool:
    """Real band point inside the window; an "inadmissible" suffix is allowed."""
    return flag.split(";")[0] == "physical"


def physical(points: list[BandPoint]) -> list[BandPoint]:
    return [p for p in points if is_physical(p.flag)]


# --------------------------------------------------------------------------
# convergence study
# --------------------------------------------------------------------------


@dataclass
class ConvergenceRow:
    order: int
    dofs: int
    k: tuple
    rel_error: float


def convergence_study(
    model: PermittivityModel,
    k_ref,
    omega_ref: float,
    orders,
    grid: int = 32,
    nev: int = 8,
    method: str = "auto",
) -> list[ConvergenceRow]:
    """Relative error of the computed k nearest to ``k_ref`` at fixed ``omega_ref``, per basis order.

    The split runs along k_ref/|k_ref| from the origin with tau chosen by
    ``select_tau``; only accepted pairs with real eta are considered.
    """
    k_ref = np.asarray(k_ref, dtype=float)
    kn = np.linalg.norm(k_ref)
    if kn == 0.0:
        raise ValueError("k_ref must be nonzero")
    ahat = k_ref / kn
    tau, _ = select_tau((0.0, 0.0, 0.0), ahat, omega_ref, model)
    split = WaveVectorSplit((0.0, 0.0, 0.0), ahat, tau)
    rows = []
    for order in orders:
        basis = build_index_set(order)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            pairs = solve_quadratic_eta(omega_ref, split, model, basis, nev=nev, method=method, shift=kn - tau, grid=grid)
        good = [p for p in pairs if p.accepted and p.is_real]
        if not good:
            rows.append(ConvergenceRow(order, 7 * len(basis) + 1, (math.nan,) * 3, math.nan))
            continue
        best = min(good, key=lambda p: np.linalg.norm(np.real(p.k) - k_ref))
        k = np.real(best.k)
        rows.append(ConvergenceRow(order, 7 * len(basis) + 1, tuple(float(v) for v in k), float(np.linalg.norm(k - k_ref) / kn)))
    return rows


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------


def write_csv(points: list[BandPoint], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for p in points:
            row = p.row()
            w.writerow(["%.17g" % v for v in row[:-1]] + [row[-1]])
    return path


def read_csv(path) -> list[list]:
    """Rows as [10 floats..., flag], the same layout as ``BandPoint.row``."""
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected header {header}")
        return [[float(v) for v in row[:-1]] + [row[-1]] for row in r]


def write_manifest(path, config: dict, seeds: dict, extra: dict | None = None) -> Path:
    """JSON echo of the run. No timestamps, so identical runs give identical files."""
    import scipy

    from . import __version__

    doc = {
        "config": config,
        "versions": {
            "blochvariety": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": ".".join(str(v) for v in sys.version_info[:3]),
        },
        "seeds": seeds,
    }
    if extra:
        doc.update(extra)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")
    return path


def write_plot_script(path, csv_files: list, title: str = "Bloch variety") -> Path:
    """gnuplot script plotting omega/2pi against alpha for the physical rows."""
    lines = [
        "set datafile separator ','",
        f"set title '{title}'",
        "set xlabel 'alpha'",
        "set ylabel 'omega / 2 pi'",
        "set xrange [0:3*pi]",
        "set xtics ('G' 0, 'X' pi, 'M' 2*pi, 'R' 3*pi)",
        "set key outside",
        "set terminal pngcairo size 900,600",
        "set output 'bands.png'",
    ]
    plots = []
    for f in csv_files:
        name = Path(f).name
        plots.append(
            f"'{name}' every ::1 using 1:(strstrt(strcol(11), 'physical') == 1 ? $5 : 1/0) with points pt 7 ps 0.6 title '{Path(f).stem}'"
        )
    lines.append("plot " + ", \\\n     ".join(plots))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path
