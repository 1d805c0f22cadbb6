"""Permittivity models on the unit cell and Fourier tables of 1/eps.

All models are piecewise constant in space. Each one can
  * evaluate eps(x, omega) at arbitrary points (wrapped into [0,1)^3),
  * report the distinct values it takes (for exact infima),
  * give the exact average of 1/eps over an axis-aligned voxel grid
    (rods) or a sub-sampled one (spheres), which feeds the Fourier table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import GridTooCoarse, MissingCoefficient

TWO_PI = 2.0 * math.pi
SQRT2 = math.sqrt(2.0)
CORE_RATIO = 0.9
EPS_CORE = 1.592**2


@dataclass(frozen=True)
class LorentzParams:
    """Resonant coating permittivity; omega0 and gamma0 are in omega/2pi units."""

    eps1: float = 7.0
    omega0: float = 0.489
    gamma0: float = 0.3
    Lambda: float = math.sqrt(1.9)

    def __post_init__(self):
        if self.omega0 <= 0:
            raise ValueError("omega0 must be positive")
        if self.gamma0 < 0:
            raise ValueError("gamma0 must be nonnegative")


def lorentz_epsilon(p: LorentzParams, omega: float) -> complex:
    nu = omega / TWO_PI
    detune = p.omega0**2 - nu**2
    return complex(p.eps1 + p.Lambda**2 * detune / (detune**2 + nu**2 * p.gamma0**2))


def _wrap(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x - np.floor(x)


class PermittivityModel:
    """Common interface. Subclasses are frozen dataclasses."""

    eps_background: complex = 1.0

    @property
    def dispersive(self) -> bool:
        return False

    @property
    def model_id(self) -> str:
        return repr(self)

    def region_values(self, omega: float) -> list[complex]:
        raise NotImplementedError

    def eval(self, x, omega: float) -> np.ndarray:
        raise NotImplementedError

    def background_mask(self, x) -> np.ndarray:
        raise NotImplementedError

    def voxel_inverse_average(self, grid: int, omega: float) -> np.ndarray:
        raise NotImplementedError

    def frozen(self, omega: float) -> "PermittivityModel":
        """Frequency-independent copy with all dispersive parts fixed at ``omega``."""
        return self


@dataclass(frozen=True)
class Homogeneous(PermittivityModel):
    eps: complex = 1.0

    def region_values(self, omega):
        return [complex(self.eps)]

    def eval(self, x, omega):
        x = np.asarray(x, dtype=float)
        return np.full(x.shape[:-1], complex(self.eps))

    def background_mask(self, x):
        x = np.asarray(x, dtype=float)
        return np.full(x.shape[:-1], complex(self.eps) == complex(self.eps_background))

    def voxel_inverse_average(self, grid, omega):
        return np.full((grid, grid, grid), 1.0 / complex(self.eps))


def _interval_overlap(grid: int, half_width: float) -> np.ndarray:
    """Fraction of each voxel [j/G, (j+1)/G) covered by the periodic set |y| <= half_width."""
    edges = np.arange(grid + 1) / grid
    lo, hi = edges[:-1], edges[1:]
    cover = np.zeros(grid)
    # the band around 0 and its periodic images at +-1 intersect [0, 1)
    for center in (0.0, 1.0):
        a = np.maximum(lo, center - half_width)
        b = np.minimum(hi, center + half_width)
        cover += np.clip(b - a, 0.0, None)
    return np.clip(cover * grid, 0.0, 1.0)


@dataclass(frozen=True)
class RodScaffold(PermittivityModel):
    """Three orthogonal square rods of width t along the cell edges.

    The material volume fraction is 3t^2 - 2t^3.
    """

    eps_rod: complex = 13.0
    rod_width: float = 0.27057
    eps_background: complex = 1.0

    def __post_init__(self):
        if not 0.0 < self.rod_width < 1.0:
            raise ValueError("rod_width must lie in (0, 1)")

    def _inside(self, x):
        y = _wrap(x)
        d = np.minimum(y, 1.0 - y)
        near = d <= self.rod_width / 2.0
        nx, ny, nz = near[..., 0], near[..., 1], near[..., 2]
        return (ny & nz) | (nx & nz) | (nx & ny)

    def region_values(self, omega):
        return [complex(self.eps_rod), complex(self.eps_background)]

    def eval(self, x, omega):
        return np.where(self._inside(x), complex(self.eps_rod), complex(self.eps_background))

    def background_mask(self, x):
        return ~self._inside(x)

    def voxel_inverse_average(self, grid, omega):
        f = _interval_overlap(grid, self.rod_width / 2.0)
        fx, fy, fz = np.meshgrid(f, f, f, indexing="ij")
        frac = fy * fz + fx * fz + fx * fy - 2.0 * fx * fy * fz
        inv_rod = 1.0 / complex(self.eps_rod)
        inv_bg = 1.0 / complex(self.eps_background)
        return inv_bg + (inv_rod - inv_bg) * frac


FCC_CENTERS = np.array(
    [[0.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]]
)


@dataclass(frozen=True)
class FccCoatedSpheres(PermittivityModel):
    """Four coated spheres per cubic cell (corners + face centers).

    Sphere radius r = delta / (2 sqrt 2); core radius 0.9 r. ``coating`` is
    either a constant permittivity or a LorentzParams resonance.
    """

    delta: float = 0.9
    eps_core: complex = EPS_CORE
    coating: Union[LorentzParams, complex] = LorentzParams()
    eps_background: complex = 1.0
    subsamples: int = 4

    def __post_init__(self):
        if not 0.0 < self.delta <= 1.0:
            raise ValueError("delta must lie in (0, 1]")

    @property
    def radius(self) -> float:
        return self.delta / (2.0 * SQRT2)

    @property
    def dispersive(self) -> bool:
        return isinstance(self.coating, LorentzParams)

    def coating_epsilon(self, omega: float) -> complex:
        if isinstance(self.coating, LorentzParams):
            return lorentz_epsilon(self.coating, omega)
        return complex(self.coating)

    def frozen(self, omega):
        return FccCoatedSpheres(
            delta=self.delta,
            eps_core=self.eps_core,
            coating=self.coating_epsilon(omega),
            eps_background=self.eps_background,
            subsamples=self.subsamples,
        )

    def _nearest_distance(self, x) -> np.ndarray:
        y = _wrap(x)
        best = None
        for c in FCC_CENTERS:
            d = y - c
            d -= np.round(d)
            r = np.sqrt(np.einsum("...i,...i->...", d, d))
            best = r if best is None else np.minimum(best, r)
        return best

    def _labels(self, x) -> np.ndarray:
        """0 = core, 1 = coating, 2 = background."""
        r = self._nearest_distance(x)
        R = self.radius
        return np.where(r < CORE_RATIO * R, 0, np.where(r <= R, 1, 2))

    def region_values(self, omega):
        return [complex(self.eps_core), self.coating_epsilon(omega), complex(self.eps_background)]

    def eval(self, x, omega):
        vals = np.array(self.region_values(omega))
        return vals[self._labels(x)]

    def background_mask(self, x):
        return self._labels(x) == 2

    def voxel_inverse_average(self, grid, omega):
        s = self.subsamples
        inv = 1.0 / np.array(self.region_values(omega))
        fine = (np.arange(grid * s) + 0.5) / (grid * s)
        acc = np.zeros((grid, grid, grid), dtype=complex)
        # one x-slab at a time keeps memory at O(grid^2 s^2)
        for i in range(grid * s):
            pts = np.stack(np.meshgrid([fine[i]], fine, fine, indexing="ij"), axis=-1)[0]
            vals = inv[self._labels(pts)]
            acc[i // s] += vals.reshape(grid, s, grid, s).sum(axis=(1, 3))
        return acc / s**3


def eval_epsilon(model: PermittivityModel, x, omega: float):
    out = model.eval(x, omega)
    return complex(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class InvEpsilonTable:
    """Fourier coefficients c(D) of 1/eps for all |d_j| <= 2*order.

    1/eps(x) ~ sum_D c(D) exp(i D.x), D = 2*pi*d.
    """

    order: int
    omega: float
    array: np.ndarray  # shape (4*order+1,)*3, index d + 2*order

    @property
    def span(self) -> int:
        return 2 * self.order

    def coeff(self, d) -> complex:
        d = np.asarray(d, dtype=int)
        if np.any(np.abs(d) > self.span):
            raise MissingCoefficient(f"difference index {tuple(d)} outside table span {self.span}")
        i, j, k = d + self.span
        return complex(self.array[i, j, k])

    def gather(self, diffs: np.ndarray) -> np.ndarray:
        """Vectorized lookup for an integer array of shape (..., 3)."""
        diffs = np.asarray(diffs)
        if np.any(np.abs(diffs) > self.span):
            raise MissingCoefficient(f"difference indices exceed table span {self.span}")
        o = diffs + self.span
        return self.array[o[..., 0], o[..., 1], o[..., 2]]


def min_grid(order: int) -> int:
    return 2 * (2 * order) + 2


def inv_epsilon_fourier(model: PermittivityModel, omega: float, order: int, grid: int = 32) -> InvEpsilonTable:
    """Fourier table of 1/eps(., omega) from voxel-averaged samples on grid^3.

    Each voxel contributes its mean of 1/eps, placed at the voxel center.
    """
    n = 4 * order + 1
    if isinstance(model, Homogeneous):
        arr = np.zeros((n, n, n), dtype=complex)
        arr[2 * order, 2 * order, 2 * order] = 1.0 / complex(model.eps)
        return InvEpsilonTable(order=order, omega=float(omega), array=arr)
    if grid < min_grid(order):
        raise GridTooCoarse(f"grid={grid} < {min_grid(order)} required for order {order}")
    samples = model.voxel_inverse_average(grid, omega)
    spec = np.fft.fftn(samples) / grid**3
    d = np.arange(-2 * order, 2 * order + 1)
    # voxel centers sit at (j + 1/2)/grid, hence the half-cell phase
    phase = np.exp(-1j * np.pi * d / grid)
    sub = spec[np.ix_(d % grid, d % grid, d % grid)]
    arr = sub * phase[:, None, None] * phase[None, :, None] * phase[None, None, :]
    return InvEpsilonTable(order=order, omega=float(omega), array=arr)


def air_fraction(model: PermittivityModel, samples: int = 200_000, seed: int = 12345) -> float:
    """Monte-Carlo volume fraction of the background region."""
    if samples < 10_000:
        raise ValueError("air_fraction needs at least 1e4 samples")
    rng = np.random.default_rng(seed)
    pts = rng.random((samples, 3))
    return float(np.mean(model.background_mask(pts)))


def rod_width_for_fill(target_air: float, tol: float = 1e-10) -> float:
    """Rod width t with 3t^2 - 2t^3 = 1 - target_air (bisection on [0, 1])."""
    if target_air >= 1.0:
        return 0.0
    if target_air <= 0.0:
        return 1.0
    goal = 1.0 - target_air
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if 3 * mid**2 - 2 * mid**3 < goal:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def scaffold_rods(air: float = 0.82, eps_rod: float = 13.0) -> RodScaffold:
    return RodScaffold(eps_rod=eps_rod, rod_width=rod_width_for_fill(air))


def coated_fcc(dispersive: bool = True) -> FccCoatedSpheres:
    """Coated-sphere crystal; the non-dispersive variant puts the core value in the coating too."""
    if dispersive:
        return FccCoatedSpheres()
    return FccCoatedSpheres(coating=complex(EPS_CORE))
