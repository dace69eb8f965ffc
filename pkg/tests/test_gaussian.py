"""Covariance algebra: embeddings, decompositions, fidelity."""

import numpy as np
import pytest

from scn_squeeze.errors import ParameterError, ValidationError
from scn_squeeze.gaussian import (
    BlochMessiah,
    CovarianceMatrix,
    OrthogonalSymplectic,
    bmd_oracle,
    conjugate,
    embed_orthogonal,
    haar_unitary,
    hs_fidelity,
    make_covariance,
    random_bmd,
    symplectic_form,
)
from scn_squeeze.seeding import rng_from


def test_symplectic_form_blocks():
    j = symplectic_form(2)
    expected = np.array(
        [
            [0, 0, 1, 0],
            [0, 0, 0, 1],
            [-1, 0, 0, 0],
            [0, -1, 0, 0],
        ],
        dtype=float,
    )
    assert np.array_equal(j, expected)


class TestCovarianceMatrix:
    def test_identity_is_valid(self):
        gamma = CovarianceMatrix(n_modes=3, data=np.eye(6))
        assert gamma.data.shape == (6, 6)

    def test_rejects_asymmetric(self):
        mat = np.eye(4)
        mat[0, 1] = 1e-6
        with pytest.raises(ValidationError):
            CovarianceMatrix(n_modes=2, data=mat)

    def test_rejects_negative_definite(self):
        with pytest.raises(ValidationError):
            CovarianceMatrix(n_modes=1, data=-np.eye(2))

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValidationError):
            CovarianceMatrix(n_modes=2, data=np.eye(3))

    def test_json_round_trip(self):
        bm = random_bmd(3, 0.1, 1.0, 0.1, loss_p=0.2, seed=5)
        gamma = make_covariance(bm)
        back = CovarianceMatrix.from_json(gamma.to_json())
        assert np.array_equal(back.data, gamma.data)

    def test_data_immutable(self):
        gamma = CovarianceMatrix(n_modes=1, data=np.eye(2))
        with pytest.raises(ValueError):
            gamma.data[0, 0] = 2.0


class TestBlochMessiah:
    def test_rejects_non_unitary(self):
        with pytest.raises(ValidationError):
            BlochMessiah(unitary=np.ones((2, 2)), squeeze_params=np.array([1.0, 0.5]))

    def test_rejects_unsorted_r(self):
        with pytest.raises(ValidationError):
            BlochMessiah(unitary=np.eye(2), squeeze_params=np.array([0.5, 1.0]))

    def test_rejects_loss_out_of_range(self):
        with pytest.raises(ValidationError):
            BlochMessiah(unitary=np.eye(2), squeeze_params=np.array([1.0, 0.5]), loss_p=1.0)

    def test_json_round_trip(self):
        bm = random_bmd(4, 0.1, 1.2, 0.1, loss_p=0.1, seed=9)
        back = BlochMessiah.from_json(bm.to_json())
        assert np.array_equal(back.unitary, bm.unitary)
        assert np.array_equal(back.squeeze_params, bm.squeeze_params)
        assert back.loss_p == bm.loss_p


class TestEmbedOrthogonal:
    def test_identity(self):
        o = embed_orthogonal(np.eye(3))
        assert np.array_equal(o.data, np.eye(6))

    def test_pure_phase_is_rotation(self):
        o = embed_orthogonal(1j * np.eye(1))
        assert np.allclose(o.data, [[0.0, -1.0], [1.0, 0.0]], atol=1e-15)

    def test_homomorphism(self):
        # embed(u v) = embed(u) embed(v) on 100 random pairs
        for trial in range(100):
            rng = rng_from(trial)
            u = haar_unitary(3, rng)
            v = haar_unitary(3, rng)
            lhs = embed_orthogonal(u @ v).data
            rhs = embed_orthogonal(u).data @ embed_orthogonal(v).data
            assert np.max(np.abs(lhs - rhs)) < 1e-10

    def test_rejects_non_unitary(self):
        with pytest.raises(ValidationError):
            embed_orthogonal(2.0 * np.eye(2))

    def test_result_is_orthogonal_symplectic(self):
        u = haar_unitary(5, rng_from(3))
        o = embed_orthogonal(u)
        # constructor enforces both invariants; re-assert directly
        assert np.allclose(o.data @ o.data.T, np.eye(10), atol=1e-12)
        j = symplectic_form(5)
        assert np.allclose(o.data @ j @ o.data.T, j, atol=1e-12)


class TestMakeCovariance:
    def test_vacuum_is_identity(self):
        bm = BlochMessiah(unitary=haar_unitary(3, rng_from(1)), squeeze_params=np.zeros(3))
        assert np.allclose(make_covariance(bm).data, np.eye(6), atol=1e-12)

    def test_single_mode_squeezer(self):
        bm = BlochMessiah(unitary=np.eye(1), squeeze_params=np.array([0.7]))
        gamma = make_covariance(bm)
        assert np.allclose(gamma.data, np.diag([np.e**1.4, np.e**-1.4]), atol=1e-12)

    def test_largest_eigenvalue_with_loss(self):
        # N=2, r=[0.8, 0.3], p=0.1: top eigenvalue is 0.9 e^{1.6} + 0.1
        bm = BlochMessiah(
            unitary=haar_unitary(2, rng_from(2)),
            squeeze_params=np.array([0.8, 0.3]),
            loss_p=0.1,
        )
        top = np.linalg.eigvalsh(make_covariance(bm).data).max()
        assert abs(top - (0.9 * np.exp(1.6) + 0.1)) < 1e-10

    def test_reciprocal_pairs_at_zero_loss(self):
        for seed in range(10):
            bm = random_bmd(4, 0.1, 1.2, 0.1, loss_p=0.0, seed=seed)
            vals = np.sort(np.linalg.eigvalsh(make_covariance(bm).data))
            products = vals * vals[::-1]
            assert np.max(np.abs(products - 1.0)) < 1e-9

    def test_determinant_one_at_zero_loss(self):
        bm = random_bmd(3, 0.1, 1.0, 0.1, loss_p=0.0, seed=4)
        sign, logdet = np.linalg.slogdet(make_covariance(bm).data)
        assert sign == 1.0
        assert abs(logdet) < 1e-8


class TestRandomBmd:
    def test_gap_respected(self):
        bm = random_bmd(2, 0.1, 1.0, 0.2, loss_p=0.0, seed=7)
        assert bm.squeeze_params[0] - bm.squeeze_params[1] >= 0.2

    def test_deterministic(self):
        a = random_bmd(4, 0.1, 1.2, 0.1, seed=3)
        b = random_bmd(4, 0.1, 1.2, 0.1, seed=3)
        assert np.array_equal(a.unitary, b.unitary)
        assert np.array_equal(a.squeeze_params, b.squeeze_params)

    def test_unitary_invariant(self):
        bm = random_bmd(6, 0.1, 1.2, 0.1, seed=11)
        defect = np.linalg.norm(bm.unitary.conj().T @ bm.unitary - np.eye(6), 2)
        assert defect < 1e-10

    def test_infeasible_gap_rejected(self):
        with pytest.raises(ParameterError):
            random_bmd(10, 0.1, 0.5, 0.2, seed=0)

    def test_all_gaps_at_least_min_gap(self):
        for seed in range(20):
            bm = random_bmd(10, 0.1, 1.2, 0.1, seed=seed)
            assert np.all(-np.diff(bm.squeeze_params) >= 0.1 - 1e-12)
            assert bm.squeeze_params.min() >= 0.1
            assert bm.squeeze_params.max() <= 1.2


class TestBmdOracle:
    def test_identity(self):
        vals, _ = bmd_oracle(CovarianceMatrix(n_modes=2, data=np.eye(4)))
        assert np.allclose(vals, 1.0)

    def test_diagonal_squeezer(self):
        s = 0.45
        gamma = CovarianceMatrix(n_modes=1, data=np.diag([np.e ** (2 * s), np.e ** (-2 * s)]))
        vals, vecs = bmd_oracle(gamma)
        assert np.allclose(vals, [np.e ** (2 * s), np.e ** (-2 * s)], atol=1e-12)
        assert np.allclose(np.abs(vecs), np.eye(2), atol=1e-12)

    def test_recovers_spectrum_and_top_supermode(self):
        bm = random_bmd(5, 0.1, 1.2, 0.1, loss_p=0.1, seed=21)
        gamma = make_covariance(bm)
        vals, vecs = bmd_oracle(gamma)
        expected = np.concatenate(
            [
                0.9 * np.exp(2 * bm.squeeze_params) + 0.1,
                (0.9 * np.exp(-2 * bm.squeeze_params) + 0.1)[::-1],
            ]
        )
        assert np.max(np.abs(vals - expected)) < 1e-10
        o = embed_orthogonal(bm.unitary).data
        overlap = abs(vecs[:, 0] @ o[:, 0])
        assert overlap >= 1 - 1e-8

    def test_recovers_squeeze_params(self):
        # r_i = 0.5 ln((lambda_i - p) / (1 - p))
        p = 0.1
        bm = random_bmd(6, 0.15, 1.2, 0.1, loss_p=p, seed=8)
        vals, _ = bmd_oracle(make_covariance(bm))
        r_hat = 0.5 * np.log((vals[:6] - p) / (1 - p))
        assert np.max(np.abs(r_hat - bm.squeeze_params)) < 1e-8


class TestHsFidelity:
    def test_self_fidelity_is_one(self):
        o = embed_orthogonal(haar_unitary(4, rng_from(2))).data
        assert abs(hs_fidelity(o, o) - 1.0) < 1e-12

    def test_sign_diagonal_absorbed(self):
        for seed in range(10):
            o = embed_orthogonal(haar_unitary(3, rng_from(seed))).data
            signs = np.diag(np.where(rng_from(seed + 100).random(6) < 0.5, -1.0, 1.0))
            assert abs(hs_fidelity(o, o @ signs) - 1.0) < 1e-12

    def test_matches_brute_force(self):
        rng = rng_from(17)
        a = np.linalg.qr(rng.standard_normal((20, 20)))[0]
        b = np.linalg.qr(rng.standard_normal((20, 20)))[0]
        brute = sum(abs((a.T @ b)[i, i]) for i in range(20)) / 20
        assert abs(hs_fidelity(a, b) - brute) < 1e-14

    def test_dimension_mismatch(self):
        with pytest.raises(ParameterError):
            hs_fidelity(np.eye(2), np.eye(3))


class TestConjugate:
    def test_identity_leaves_unchanged(self):
        bm = random_bmd(3, 0.1, 1.0, 0.1, seed=2)
        gamma = make_covariance(bm)
        out = conjugate(gamma, OrthogonalSymplectic(data=np.eye(6)))
        assert np.allclose(out.data, gamma.data, atol=1e-15)

    def test_eigenvalues_invariant(self):
        bm = random_bmd(4, 0.1, 1.2, 0.1, loss_p=0.05, seed=6)
        gamma = make_covariance(bm)
        o = embed_orthogonal(haar_unitary(4, rng_from(13)))
        before = np.sort(np.linalg.eigvalsh(gamma.data))
        after = np.sort(np.linalg.eigvalsh(conjugate(gamma, o).data))
        assert np.max(np.abs(before - after)) < 1e-9

    def test_own_bmd_diagonalizes(self):
        bm = random_bmd(4, 0.1, 1.2, 0.1, loss_p=0.1, seed=19)
        gamma = make_covariance(bm)
        o = embed_orthogonal(bm.unitary)
        diag = conjugate(gamma, OrthogonalSymplectic(data=o.data.T))
        off = diag.data - np.diag(np.diag(diag.data))
        assert np.linalg.norm(off, 2) < 1e-9
