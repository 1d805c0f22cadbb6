import math

import numpy as np
import pytest

from blochvariety.errors import MissingCoefficient
from blochvariety.forms import (
    FieldCoefficients,
    alpha_cross,
    assemble_a1,
    assemble_a2,
    assemble_b1,
    assemble_b2,
    assemble_c1,
    assemble_quadratic,
    build_linearized_system,
)
from blochvariety.lattice import WaveVectorSplit, build_index_set
from blochvariety.materials import Homogeneous, inv_epsilon_fourier, scaffold_rods

PI = math.pi


def _table(eps, order):
    return inv_epsilon_fourier(Homogeneous(eps), 0.0, order)


@pytest.fixture
def split_x():
    return WaveVectorSplit((PI, 0, 0), (1, 0, 0), 0.0)


def test_a1_examples(basis0, split_x):
    a = assemble_a1(basis0, split_x, 0.0, 1.0, _table(1.0, 0))
    assert np.allclose(a["v1", "u1"], PI**2 * np.diag([0, 1, 1]))
    a = assemble_a1(basis0, split_x, PI / 2, 1.0, _table(1.0, 0))
    assert np.allclose(a["v1", "u1"], np.diag([-PI**2 / 4, 3 * PI**2 / 4, 3 * PI**2 / 4]))
    w = 0.7
    a = assemble_a1(basis0, split_x, w, 1.0, _table(2.0, 0))
    assert np.allclose(a["v1", "u1"], PI**2 / 2 * np.diag([0, 1, 1]) - w**2 * np.eye(3))
    assert np.allclose(a["v2", "u2"], np.eye(3))


def test_a2_examples(basis0, split_x):
    S = alpha_cross((1, 0, 0))
    assert np.allclose(S, 1j * np.array([[0, 0, 0], [0, 0, -1], [0, 1, 0]]))
    a = assemble_a2(basis0, split_x, 2.5, _table(1.0, 0))
    assert np.allclose(a["v1", "u2"], np.diag([0, 1, 1]))
    assert np.allclose(a["v2", "u1"], -2.5 * np.eye(3))
    a2 = assemble_a2(basis0, split_x, 1.0, _table(2.0, 0))
    assert np.allclose(a2["v1", "u2"], 0.5 * np.diag([0, 1, 1]))


def test_b_columns(basis0, basis1, split_x):
    assert np.allclose(assemble_b1(basis0, split_x)[:, 0], 1j * np.array([PI, 0, 0]))
    ah = np.array([0.6, 0.0, 0.8])
    b2 = assemble_b2(basis1, ah)
    for i in range(len(basis1)):
        assert np.allclose(b2[3 * i : 3 * i + 3, i], 1j * ah)
    assert np.count_nonzero(b2) == 2 * len(basis1)


def test_c1_coupling(basis1):
    e0 = assemble_c1(basis1)
    assert e0[basis1.zero_position] == 1
    assert np.count_nonzero(e0) == 1


def test_system_structure(basis1, gx_split):
    sys_ = build_linearized_system(basis1, gx_split, 0.8, 1.7, inv_epsilon_fourier(scaffold_rods(), 0.8, 1, 16))
    assert sys_.dim == 190
    m = sys_.m
    A, C = sys_.A, sys_.C
    assert np.allclose(A[sys_.u2, sys_.u2], 1.7 * np.eye(3 * m))
    assert np.allclose(C[sys_.u2, sys_.u1], -1.7 * np.eye(3 * m))
    # constraint rows are the adjoints of the multiplier columns
    assert np.allclose(A[sys_.p, sys_.u1], A[sys_.u1, sys_.p].conj().T)
    assert np.allclose(C[sys_.p, sys_.u1], C[sys_.u1, sys_.p].conj().T)
    z = basis1.zero_position
    assert A[sys_.s, 6 * m + z] == 1 and A[6 * m + z, sys_.s] == 1
    assert np.count_nonzero(A[sys_.s]) == 1 and np.count_nonzero(C[sys_.s]) == 0


def test_order0_dimension(basis0, split_x):
    assert build_linearized_system(basis0, split_x, 1.0, 1.0, _table(1.0, 0)).dim == 8


def test_missing_coefficient(basis1, split_x):
    with pytest.raises(MissingCoefficient):
        assemble_a1(basis1, split_x, 1.0, 1.0, _table(1.0, 0))


def test_plane_wave_eigenvector(basis1, gx_split):
    # eps = 1, omega = pi/2: k = (pi/2, 0, 0) on mode I = 2 pi (-1, 0, 0) with eta = pi/2
    sys_ = build_linearized_system(basis1, gx_split, PI / 2, 1.0, _table(1.0, 1))
    eta = PI / 2
    u1 = np.zeros((sys_.m, 3), dtype=complex)
    u1[basis1.mode_index[(-1, 0, 0)]] = [0, 1, 0]
    X = FieldCoefficients(u1, eta * u1, np.zeros(sys_.m, complex), 0j).to_vector()
    assert np.linalg.norm(sys_.A @ X + eta * sys_.C @ X) / np.linalg.norm(X) <= 1e-10


def test_field_vector_roundtrip():
    rng = np.random.default_rng(0)
    X = rng.standard_normal(8 * 7 + 1) + 1j * rng.standard_normal(57)
    assert np.array_equal(FieldCoefficients.from_vector(X, 8).to_vector(), X)


def test_linearized_matches_quadratic(basis1, gx_split):
    """With u2 = eta u1 the u1 rows of (A + eta C) equal the quadratic form."""
    rng = np.random.default_rng(1)
    omega = 0.9
    table = inv_epsilon_fourier(scaffold_rods(), omega, 1, 16)
    sys_ = build_linearized_system(basis1, gx_split, omega, 1.0, table)
    m = sys_.m
    for eta in (0.4, -1.3 + 0.2j):
        Q = assemble_quadratic(basis1, gx_split, omega, table, eta)
        u = rng.standard_normal(3 * m) + 1j * rng.standard_normal(3 * m)
        p = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        s = 0.3 - 0.1j
        X = np.concatenate([u, eta * u, p, [s]])
        lin = sys_.A @ X + eta * (sys_.C @ X)
        quad = Q @ np.concatenate([u, p, [s]])
        assert np.allclose(lin[: 3 * m], quad[: 3 * m], atol=1e-12 * np.linalg.norm(quad))
        assert np.allclose(lin[3 * m : 6 * m], 0, atol=1e-12)
        # the multiplier rows agree as well: -i k_I . u_I and the zero-mode couplings
        assert np.allclose(lin[sys_.p], quad[3 * m : 4 * m], atol=1e-12 * np.linalg.norm(quad))
        assert lin[sys_.s] == pytest.approx(quad[4 * m], abs=1e-12)
