import numpy as np
import pytest

import oracles
from stresstune import (
    Configuration,
    DenseSymmetricMatrix,
    RigidMap,
    affine_rank,
    double_center,
    pairwise_sq_distances,
    pseudo_inverse,
    read_configuration_csv,
    top_eigenpairs,
    write_configuration_csv,
)
from stresstune.core import EigenSolverError, _EIGH_SUBSET_MIN_ORDER


class TestConfiguration:
    def test_shape_and_read_only(self):
        cfg = Configuration([[1.0, 2.0], [3.0, 4.0]])
        assert (cfg.n, cfg.p) == (2, 2)
        with pytest.raises(ValueError):
            cfg.points[0, 0] = 9.0

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            Configuration(np.zeros((0, 2)))
        with pytest.raises(ValueError):
            Configuration(np.zeros(3))
        with pytest.raises(ValueError):
            Configuration([[np.nan, 0.0]])


class TestDenseSymmetricMatrix:
    def test_rejects_asymmetry_beyond_tolerance(self):
        m = np.array([[0.0, 1.0], [1.0 + 1e-11, 0.0]])
        with pytest.raises(ValueError):
            DenseSymmetricMatrix(m)

    def test_accepts_tiny_asymmetry(self):
        m = np.array([[0.0, 1.0], [1.0 + 1e-13, 0.0]])
        assert DenseSymmetricMatrix(m).order == 2

    def test_infinite_entries_gated_by_flag(self):
        m = np.array([[0.0, np.inf], [np.inf, 0.0]])
        with pytest.raises(ValueError):
            DenseSymmetricMatrix(m)
        assert DenseSymmetricMatrix(m, allow_infinite=True).order == 2

    def test_rejects_nan_always(self):
        m = np.array([[0.0, np.nan], [np.nan, 0.0]])
        with pytest.raises(ValueError):
            DenseSymmetricMatrix(m, allow_infinite=True)


class TestRigidMap:
    def test_apply_rotation_and_shift(self):
        Q = np.array([[0.0, -1.0], [1.0, 0.0]])
        t = np.array([3.0, -1.0])
        out = RigidMap(Q, t).apply(np.array([[1.0, 0.0]]))
        np.testing.assert_allclose(out, [[3.0, 0.0]])

    def test_orthogonality_enforced(self):
        with pytest.raises(ValueError):
            RigidMap(np.array([[1.0, 0.5], [0.0, 1.0]]), np.zeros(2))

    def test_reflection_flag_enforced(self):
        mirror = np.array([[1.0, 0.0], [0.0, -1.0]])
        assert RigidMap(mirror, np.zeros(2)).p == 2
        with pytest.raises(ValueError):
            RigidMap(mirror, np.zeros(2), allow_reflection=False)


class TestPairwiseSqDistances:
    def test_three_four_five_triangle(self):
        cfg = Configuration([[0.0, 0.0], [3.0, 4.0]])
        np.testing.assert_array_equal(
            pairwise_sq_distances(cfg).values, [[0.0, 25.0], [25.0, 0.0]]
        )

    def test_single_point(self):
        out = pairwise_sq_distances(Configuration([[2.0, 7.0]]))
        np.testing.assert_array_equal(out.values, [[0.0]])

    def test_matches_double_loop(self, rng):
        pts = rng.standard_normal((5, 2))
        got = pairwise_sq_distances(Configuration(pts)).values
        np.testing.assert_allclose(got, oracles.sq_dist_double_loop(pts), atol=1e-12)

    def test_rigid_invariance(self, rng):
        pts = rng.standard_normal((8, 3))
        Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        moved = pts @ Q.T + rng.standard_normal(3)
        a = pairwise_sq_distances(Configuration(pts)).values
        b = pairwise_sq_distances(Configuration(moved)).values
        np.testing.assert_allclose(b, a, rtol=1e-9, atol=1e-12)


class TestDoubleCenter:
    def test_constant_matrix_goes_to_zero(self):
        out = double_center(DenseSymmetricMatrix(np.full((4, 4), 3.7)))
        np.testing.assert_allclose(out.values, 0.0, atol=1e-12)

    def test_idempotent(self, rng):
        m = rng.standard_normal((6, 6))
        sym = DenseSymmetricMatrix((m + m.T) / 2)
        once = double_center(sym)
        twice = double_center(once)
        np.testing.assert_allclose(twice.values, once.values, atol=1e-12)

    def test_hand_three_by_three(self):
        # Hand evaluation of b_ij = a_ij - rowmean_i - rowmean_j + grand mean
        # on [[0,1,4],[1,0,1],[4,1,0]]: row means (5/3, 2/3, 5/3), grand 4/3.
        out = double_center(DenseSymmetricMatrix([[0.0, 1.0, 4.0], [1.0, 0.0, 1.0], [4.0, 1.0, 0.0]]))
        np.testing.assert_allclose(
            out.values, [[-2.0, 0.0, 2.0], [0.0, 0.0, 0.0], [2.0, 0.0, -2.0]], atol=1e-12
        )
        assert np.abs(out.values.sum(axis=0)).max() < 1e-12

    def test_gram_from_realizable_distances_is_psd(self, rng):
        pts = rng.standard_normal((12, 3))
        B = double_center(DenseSymmetricMatrix(-0.5 * oracles.sq_dist_double_loop(pts)))
        evals = np.linalg.eigvalsh(B.values)
        norm = np.abs(evals).max()
        assert evals.min() >= -1e-8 * norm


class TestTopEigenpairs:
    def test_identity_spectrum(self):
        vals, vecs = top_eigenpairs(DenseSymmetricMatrix(np.eye(3)), 2)
        np.testing.assert_allclose(vals, [1.0, 1.0])
        np.testing.assert_allclose(vecs.T @ vecs, np.eye(2), atol=1e-12)

    def test_diagonal_matrix(self):
        vals, vecs = top_eigenpairs(DenseSymmetricMatrix(np.diag([5.0, 2.0, 1.0])), 1)
        np.testing.assert_allclose(vals, [5.0])
        np.testing.assert_allclose(np.abs(vecs[:, 0]), [1.0, 0.0, 0.0], atol=1e-12)

    def test_residual_and_full_solver_agreement(self, rng):
        m = rng.standard_normal((6, 6))
        B = (m + m.T) / 2
        vals, vecs = top_eigenpairs(DenseSymmetricMatrix(B), 3)
        for k in range(3):
            assert np.linalg.norm(B @ vecs[:, k] - vals[k] * vecs[:, k]) < 1e-8
        full = np.sort(np.linalg.eigvalsh(B))[::-1]
        np.testing.assert_allclose(vals, full[:3], atol=1e-10)
        assert vals[0] >= vals[1] >= vals[2]

    def test_large_order_path_matches_full_solver(self, rng):
        n = _EIGH_SUBSET_MIN_ORDER + 8
        m = rng.standard_normal((n, n))
        B = (m + m.T) / 2
        vals, vecs = top_eigenpairs(DenseSymmetricMatrix(B), 2)
        full = np.sort(np.linalg.eigvalsh(B))[::-1]
        np.testing.assert_allclose(vals, full[:2], atol=1e-8)
        for k in range(2):
            assert np.linalg.norm(B @ vecs[:, k] - vals[k] * vecs[:, k]) < 1e-8 * n

    def test_p_out_of_range(self):
        with pytest.raises(ValueError):
            top_eigenpairs(DenseSymmetricMatrix(np.eye(3)), 4)
        with pytest.raises(ValueError):
            top_eigenpairs(DenseSymmetricMatrix(np.eye(3)), 0)


class TestPseudoInverse:
    def test_orthonormal_columns_give_transpose(self):
        Y = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        np.testing.assert_allclose(pseudo_inverse(Y), Y.T, atol=1e-12)

    def test_scalar(self):
        np.testing.assert_allclose(pseudo_inverse(np.array([[2.0]])), [[0.5]])

    def test_penrose_identities(self, rng):
        Y = rng.standard_normal((5, 2))
        P = pseudo_inverse(Y)
        np.testing.assert_allclose(Y @ P @ Y, Y, atol=1e-8)
        np.testing.assert_allclose(P @ Y @ P, P, atol=1e-8)
        np.testing.assert_allclose((Y @ P).T, Y @ P, atol=1e-8)
        np.testing.assert_allclose((P @ Y).T, P @ Y, atol=1e-8)

    def test_rank_deficient_thresholding(self):
        Y = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])  # rank 1
        P = pseudo_inverse(Y)
        np.testing.assert_allclose(Y @ P @ Y, Y, atol=1e-8)


class TestAffineRank:
    def test_collinear_points(self):
        pts = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
        assert affine_rank(pts) == 1

    def test_generic_points(self, rng):
        assert affine_rank(rng.standard_normal((5, 2))) == 2

    def test_single_point(self):
        assert affine_rank(np.array([[3.0, 4.0]])) == 0


class TestConfigurationCsv:
    def test_round_trip_is_exact_and_byte_stable(self, tmp_path, rng):
        cfg = Configuration(rng.standard_normal((7, 3)))
        path = tmp_path / "config.csv"
        write_configuration_csv(cfg, path)
        back = read_configuration_csv(path)
        np.testing.assert_array_equal(back.points, cfg.points)
        first = path.read_bytes()
        write_configuration_csv(back, path)
        assert path.read_bytes() == first

    def test_header(self, tmp_path):
        path = tmp_path / "config.csv"
        write_configuration_csv(Configuration([[1.0, 2.0]]), path)
        assert path.read_text().splitlines()[0] == "id,x1,x2"

    def test_bad_ids_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("id,x1\n0,1.0\n2,2.0\n")
        with pytest.raises(ValueError):
            read_configuration_csv(path)
