import math

import numpy as np
import pytest

from blochvariety.arnoldi import arnoldi
from blochvariety.eigensolvers import ShiftInvert
from blochvariety.errors import ArnoldiNoConvergence
from blochvariety.forms import build_linearized_system
from blochvariety.lattice import WaveVectorSplit
from blochvariety.materials import Homogeneous, inv_epsilon_fourier
from blochvariety.oracles import dense_generalized_eig


def test_diagonal_operator():
    n = 200
    d = np.arange(1, n + 1, dtype=float)
    res = arnoldi(lambda x: d * x, n, m=30, nev=5, tol=1e-12)
    assert res.converged.all()
    assert np.allclose(np.sort(res.values.real)[::-1], [200, 199, 198, 197, 196], rtol=0, atol=1e-10 * 200)


def test_requires_subspace_larger_than_nev():
    with pytest.raises(ValueError):
        arnoldi(lambda x: x, 10, m=4, nev=4)
    with pytest.raises(ValueError):
        arnoldi(lambda x: x, 10, m=5, nev=0)


def test_deterministic_start():
    d = np.linspace(1, 2, 50)
    a = arnoldi(lambda x: d * x, 50, m=20, nev=3, seed=7)
    b = arnoldi(lambda x: d * x, 50, m=20, nev=3, seed=7)
    assert np.array_equal(a.values, b.values)


def test_rank_deficient_flags_missing():
    d = np.zeros(40)
    d[:3] = [3.0, 2.0, 1.0]
    res = arnoldi(lambda x: d * x, 40, m=10, nev=5, raise_on_failure=False)
    assert res.n_converged == 3
    assert np.allclose(np.sort(res.values[res.converged].real), [1, 2, 3])
    assert not res.converged.all()


def test_exhausted_restarts_raise_with_partial_result():
    rng = np.random.default_rng(0)
    d = 1.0 + 1e-9 * rng.standard_normal(300)
    with pytest.raises(ArnoldiNoConvergence) as info:
        arnoldi(lambda x: d * x, 300, m=8, nev=6, tol=1e-16, max_restarts=2)
    assert info.value.result is not None
    assert info.value.k_converged == info.value.result.n_converged


def test_matches_dense_on_homogeneous_system(basis1):
    split = WaveVectorSplit((0, 0, 0), (1, 0, 0), math.pi)
    sys_ = build_linearized_system(basis1, split, 1.1, 1.0, inv_epsilon_fourier(Homogeneous(1.0), 1.1, 1))
    op = ShiftInvert(sys_, 0.3)
    res = arnoldi(op, sys_.dim, m=40, nev=8, tol=1e-12)
    dense = dense_generalized_eig(sys_.A, sys_.C).finite
    for mu in res.values:
        eta = 0.3 + 1 / mu
        assert np.min(np.abs(dense - eta)) <= 1e-8 * abs(eta)
