import math

import numpy as np
import pytest

from blochvariety.errors import GridTooCoarse, MissingCoefficient
from blochvariety.materials import (
    EPS_CORE,
    FccCoatedSpheres,
    Homogeneous,
    LorentzParams,
    RodScaffold,
    air_fraction,
    eval_epsilon,
    inv_epsilon_fourier,
    lorentz_epsilon,
    coated_fcc,
    scaffold_rods,
    rod_width_for_fill,
)

TWO_PI = 2 * math.pi


def test_eval_examples():
    assert eval_epsilon(Homogeneous(13.0), (0.2, 0.4, 0.9), 0.0) == 13
    assert eval_epsilon(RodScaffold(13.0, 0.3), (0.5, 0.5, 0.5), 0.0) == 1
    assert eval_epsilon(RodScaffold(13.0, 0.3), (0.5, 0.01, 0.99), 0.0) == 13
    assert eval_epsilon(coated_fcc(), (0.5, 0.5, 0.0), 1.0) == pytest.approx(2.534464)


def test_periodic_wrap():
    m = coated_fcc()
    x = np.array([0.1, 0.33, 0.71])
    assert eval_epsilon(m, x, 1.0) == eval_epsilon(m, x + [2, -1, 5], 1.0)


def test_fcc_coating_shell():
    m = FccCoatedSpheres(coating=5.0)
    r = m.radius
    assert eval_epsilon(m, (0.95 * r, 0, 0), 0.0) == 5.0
    assert eval_epsilon(m, (0.85 * r, 0, 0), 0.0) == pytest.approx(EPS_CORE)
    assert eval_epsilon(m, (1.05 * r, 0, 0), 0.0) == 1.0


def test_lorentz_values():
    p = LorentzParams()
    assert lorentz_epsilon(p, TWO_PI * 0.489) == 7.0
    assert lorentz_epsilon(p, 0.0).real == pytest.approx(7 + 1.9 / 0.489**2)
    assert lorentz_epsilon(p, 1e6).real == pytest.approx(7.0, abs=1e-8)


def test_homogeneous_table():
    t = inv_epsilon_fourier(Homogeneous(13.0), 0.0, 1)
    assert t.coeff((0, 0, 0)) == pytest.approx(1 / 13)
    arr = t.array.copy()
    arr[2, 2, 2] = 0
    assert not np.any(arr)


def test_rod_average_coefficient():
    t = inv_epsilon_fourier(RodScaffold(13.0, 0.2706), 0.0, 1, grid=64)
    assert abs(t.coeff((0, 0, 0)) - (0.82 + 0.18 / 13)) <= 1e-3


@pytest.mark.parametrize("model", [scaffold_rods(), FccCoatedSpheres(coating=7.0)])
def test_table_hermitian_for_real_eps(model):
    t = inv_epsilon_fourier(model, 0.0, 1, grid=24)
    a = t.array
    assert np.allclose(a[::-1, ::-1, ::-1], np.conj(a), atol=1e-10)
    assert t.coeff((0, 0, 0)).real > 0


def test_fcc_at_resonance_matches_frozen():
    w = TWO_PI * 0.489
    a = inv_epsilon_fourier(coated_fcc(), w, 1, grid=16).array
    b = inv_epsilon_fourier(FccCoatedSpheres(coating=7.0), w, 1, grid=16).array
    assert np.array_equal(a, b)


def test_table_errors():
    with pytest.raises(GridTooCoarse):
        inv_epsilon_fourier(scaffold_rods(), 0.0, 2, grid=8)
    t = inv_epsilon_fourier(scaffold_rods(), 0.0, 1, grid=16)
    with pytest.raises(MissingCoefficient):
        t.coeff((3, 0, 0))


def test_air_fractions():
    assert air_fraction(Homogeneous(1.0)) == 1.0
    assert air_fraction(RodScaffold(13.0, 0.2706)) == pytest.approx(0.82, abs=0.005)
    r = 0.9 / (2 * math.sqrt(2))
    assert air_fraction(coated_fcc()) == pytest.approx(1 - 4 * (4 / 3) * math.pi * r**3, abs=0.005)


def test_rod_width_for_fill():
    assert rod_width_for_fill(1.0) == 0.0
    assert rod_width_for_fill(0.82) == pytest.approx(0.27057, abs=1e-5)
    t = rod_width_for_fill(0.5)
    assert 3 * t**2 - 2 * t**3 == pytest.approx(0.5, abs=1e-9)
    # the cubic is symmetric about t = 1/2, so half air means t = 1/2 exactly
    assert t == pytest.approx(0.5, abs=1e-9)


def test_frozen_and_dispersive_flags():
    m = coated_fcc()
    assert m.dispersive and not m.frozen(1.0).dispersive
    assert not coated_fcc(dispersive=False).dispersive


def test_real_part_bounded_below():
    m = coated_fcc()
    for nu in np.linspace(0.01, 0.8, 40):
        vals = m.region_values(TWO_PI * nu)
        assert min(v.real for v in vals) >= 1.0
