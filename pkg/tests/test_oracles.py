import math

import numpy as np
import pytest

from blochvariety.errors import DimensionTooLarge, NotFrequencyIndependent
from blochvariety.lattice import WaveVectorSplit, build_index_set
from blochvariety.materials import Homogeneous, coated_fcc
from blochvariety.oracles import (
    analytic_etas,
    analytic_omegas,
    cross_consistency_report,
    dense_generalized_eig,
    run_validation,
)

PI = math.pi


def test_analytic_omegas_lowest_shells(basis1):
    om = analytic_omegas(1.0, (PI / 2, 0, 0), basis1)
    assert om[0][0] == pytest.approx(PI / 2, rel=1e-15) and om[0][1] == 2
    assert om[1][0] == pytest.approx(3 * PI / 2, rel=1e-15) and om[1][1] == 2


def test_analytic_omegas_scaling(basis1):
    a = analytic_omegas(1.0, (0.3, 0.2, 0.1), basis1)
    b = analytic_omegas(4.0, (0.3, 0.2, 0.1), basis1)
    assert [x[0] / 2 for x in a] == pytest.approx([x[0] for x in b], rel=1e-14)


def test_analytic_omegas_gamma_point_shell(basis1):
    om = analytic_omegas(2.0, (0, 0, 0), basis1)
    assert om[0] == (0.0, 2)
    assert om[1][0] == pytest.approx(2 * PI / math.sqrt(2.0))
    assert om[1][1] == 12


def test_analytic_etas_quadratic_formula(basis0):
    split = WaveVectorSplit((0, 0, 0), (1, 0, 0), PI)
    roots = analytic_etas(1.0, PI / 2, split, basis0)
    vals = sorted(r[0].real for r in roots)
    assert vals == pytest.approx([-1.5 * PI, -0.5 * PI])
    assert all(m == 2 for _, m in roots)


def test_analytic_etas_evanescent_regime(basis1):
    split = WaveVectorSplit((PI, 0, 0), (0, 1, 0), 0.0)
    # eps omega^2 below |gamma|^2 - (alpha_hat . gamma)^2 = pi^2 for every mode
    roots = analytic_etas(1.0, 1.0, split, basis1)
    assert all(abs(r.imag) > 0 for r, _ in roots)


def test_analytic_etas_invariant_under_equivalent_modes(basis1):
    split = WaveVectorSplit((0, 0, 0), (1, 0, 0), PI)
    roots = dict((round(r.real, 9) + 1j * round(r.imag, 9), m) for r, m in analytic_etas(1.0, 2.0, split, basis1))
    # modes (i1, +-1, 0) and (i1, 0, +-1) share alpha_hat.gamma and |gamma|
    assert all(m % 2 == 0 for m in roots.values())


def test_dense_identity_pencil():
    spec = dense_generalized_eig(np.eye(4), np.eye(4))
    assert np.allclose(spec.eta, -1.0)


def test_dense_zero_c_is_all_infinite():
    spec = dense_generalized_eig(np.eye(3), np.zeros((3, 3)))
    assert np.all(np.isinf(spec.eta))
    assert spec.finite.size == 0


def test_dense_rejects_large():
    with pytest.raises(DimensionTooLarge):
        dense_generalized_eig(np.eye(501), np.eye(501))


def test_dense_order0_matches_analytic(basis0):
    from blochvariety.forms import build_linearized_system
    from blochvariety.materials import inv_epsilon_fourier

    split = WaveVectorSplit((0.3, -0.2, 0.1), (0.6, 0.8, 0.0), 0.5)
    omega = 1.3
    sys_ = build_linearized_system(basis0, split, omega, 1.0, inv_epsilon_fourier(Homogeneous(1.0), omega, 0))
    fin = list(dense_generalized_eig(sys_.A, sys_.C).finite)
    for root, mult in analytic_etas(1.0, omega, split, basis0):
        close = [e for e in fin if abs(e - root) <= 1e-10 * max(1, abs(root))]
        assert len(close) >= mult


def test_cross_consistency_homogeneous(basis1):
    rep = cross_consistency_report(Homogeneous(1.0), basis1, [PI / 4, 1.25 * PI, 2.75 * PI], nev=2)
    assert rep.max_deviation <= 1e-10


def test_cross_consistency_rejects_lorentz(basis1):
    with pytest.raises(NotFrequencyIndependent):
        cross_consistency_report(coated_fcc(dispersive=True), basis1, [PI / 2])


def test_validation_suite_passes():
    checks = run_validation(1)
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]
