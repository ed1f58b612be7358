import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reference_impl import ref_eer, ref_pearson
from saltkit.metrics import (
    ScoreSet,
    SimilarityMatrix,
    compute_eer,
    diag_dominance,
    gain_vd,
    pca_project,
    pearson,
    read_scores,
    similarity_matrix,
    weighted_average,
)
from saltkit.prng import SplitMix64

scores = st.lists(
    st.floats(min_value=-10, max_value=10, allow_nan=False), min_size=1, max_size=40
)


def gaussians(seed, n):
    rng = SplitMix64(seed)
    return np.array([rng.next_gaussian() for _ in range(n)])


class TestEER:
    def test_perfectly_separated(self):
        eer, _ = compute_eer(ScoreSet([0.9, 0.8, 0.7], [0.1, 0.2, 0.3]))
        assert eer == 0.0

    def test_hand_case_3v3(self):
        eer, threshold = compute_eer(ScoreSet([0.7, 0.6, 0.4], [0.5, 0.3, 0.2]))
        assert eer == 1 / 3
        assert threshold == 0.45  # midpoint between the crossing scores

    def test_fully_swapped_is_above_half(self):
        # genuine below impostor: the "worse than chance" regime
        eer, _ = compute_eer(ScoreSet([0.1, 0.2], [0.8, 0.9]))
        assert eer >= 0.5

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ScoreSet([], [0.1])
        with pytest.raises(ValueError):
            ScoreSet([0.1], [])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            ScoreSet([float("nan")], [0.1])

    @settings(max_examples=80)
    @given(scores, scores)
    def test_matches_exhaustive_reference(self, genuine, impostor):
        eer, _ = compute_eer(ScoreSet(genuine, impostor))
        assert eer == pytest.approx(ref_eer(genuine, impostor), abs=1e-12)

    # Scores on a 1/64 grid: distinct inputs stay distinct after the cubic,
    # so the transform is strictly increasing in float arithmetic too.
    grid_scores = st.lists(
        st.integers(min_value=-640, max_value=640).map(lambda i: i / 64.0),
        min_size=1,
        max_size=40,
    )

    @settings(max_examples=60)
    @given(grid_scores, grid_scores)
    def test_monotone_transform_invariance(self, genuine, impostor):
        eer, _ = compute_eer(ScoreSet(genuine, impostor))

        def squash(xs):  # strictly increasing map
            return [x**3 + 2.0 * x for x in xs]

        transformed, _ = compute_eer(ScoreSet(squash(genuine), squash(impostor)))
        assert transformed == pytest.approx(eer, abs=1e-9)

    def test_identical_distributions_near_half(self):
        g = gaussians(1, 2000)
        i = gaussians(2, 2000)
        eer, _ = compute_eer(ScoreSet(g, i))
        assert eer == pytest.approx(0.5, abs=0.03)


class TestScoreFile:
    def test_read(self, tmp_path):
        p = tmp_path / "s.txt"
        p.write_text("genuine\t0.9\nimpostor\t0.1\n\ngenuine\t0.8\n")
        ss = read_scores(p)
        assert ss.genuine.tolist() == [0.9, 0.8]
        assert ss.impostor.tolist() == [0.1]

    @pytest.mark.parametrize(
        "line", ["genuine 0.9", "unknown\t0.9", "genuine\tnot-a-number"]
    )
    def test_malformed_line_number(self, tmp_path, line):
        p = tmp_path / "s.txt"
        p.write_text(f"genuine\t0.5\n{line}\n")
        with pytest.raises(ValueError, match=":2:"):
            read_scores(p)


class TestPearson:
    def test_identity_is_one(self):
        a = gaussians(5, 30)
        assert pearson(a, a) == pytest.approx(1.0, abs=1e-12)

    def test_exact_negative_linear(self):
        a = gaussians(6, 30)
        assert pearson(a, -a + 5.0) == pytest.approx(-1.0, abs=1e-12)

    def test_hand_case(self):
        assert pearson(np.array([1.0, 2, 3]), np.array([1.0, 2, 4])) == pytest.approx(
            0.9819805060619659, abs=1e-12
        )

    @settings(max_examples=40)
    @given(
        st.integers(min_value=0, max_value=2**32),
        st.floats(min_value=0.01, max_value=100),
        st.floats(min_value=-50, max_value=50),
    )
    def test_positive_affine_invariance_and_antisymmetry(self, seed, a_scale, shift):
        x = gaussians(seed, 25)
        y = gaussians(seed + 1, 25)
        r = pearson(x, y)
        assert pearson(x, a_scale * y + shift) == pytest.approx(r, abs=1e-9)
        assert pearson(x, -y) == pytest.approx(-r, abs=1e-12)

    def test_matches_reference(self):
        x = gaussians(9, 20)
        y = gaussians(10, 20)
        assert pearson(x, y) == pytest.approx(ref_pearson(x.tolist(), y.tolist()), abs=1e-12)

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            pearson(np.ones(5), np.arange(5.0))
        with pytest.raises(ValueError):
            pearson(np.arange(3.0), np.arange(4.0))


class TestSimilarity:
    def test_orthogonal_identity(self):
        emb = {"a": np.array([[1.0, 0, 0]]), "b": np.array([[0.0, 1, 0]]), "c": np.array([[0.0, 0, 1]])}
        m = similarity_matrix(emb, emb)
        np.testing.assert_allclose(m.entries, np.eye(3), atol=1e-15)
        assert m.ids == ["a", "b", "c"]

    def test_self_similarity_diagonal(self):
        emb = {
            "a": np.tile(gaussians(1, 4), (3, 1)),
            "b": np.tile(gaussians(2, 4), (2, 1)),
        }
        m = similarity_matrix(emb, emb)
        np.testing.assert_allclose(np.diag(m.entries), [1.0, 1.0], atol=1e-12)

    def test_hand_case(self):
        r2 = np.sqrt(2) / 2
        emb = {"s1": np.array([[1.0, 0.0]]), "s2": np.array([[r2, r2]])}
        m = similarity_matrix(emb, emb)
        np.testing.assert_allclose(
            m.entries, [[1.0, 0.7071067811865476], [0.7071067811865476, 1.0]], atol=1e-12
        )

    def test_mean_over_cross_pairs(self):
        a = {"s": np.array([[1.0, 0.0], [0.0, 1.0]])}
        b = {"s": np.array([[1.0, 0.0]])}
        m = similarity_matrix(a, b)
        assert m.entries[0, 0] == pytest.approx(0.5, abs=1e-15)

    def test_id_mismatch(self):
        with pytest.raises(ValueError, match="only in A"):
            similarity_matrix({"a": np.ones((1, 2))}, {"b": np.ones((1, 2))})


class TestGainVD:
    def hand_matrix(self, entries, ids=("x", "y")):
        return SimilarityMatrix(ids=list(ids), entries=np.array(entries))

    def test_diag_dominance_hand_cases(self):
        assert diag_dominance(self.hand_matrix(np.eye(2))) == 1.0
        assert diag_dominance(self.hand_matrix(np.full((2, 2), 0.37))) == 0.0
        assert diag_dominance(
            self.hand_matrix([[0.9, 0.1], [0.3, 0.7]])
        ) == pytest.approx(0.6, abs=1e-12)

    def test_shift_invariance(self):
        m = self.hand_matrix([[0.9, 0.1], [0.3, 0.7]])
        shifted = self.hand_matrix(m.entries + 0.17)
        assert diag_dominance(shifted) == pytest.approx(diag_dominance(m), abs=1e-12)

    def test_needs_two_speakers(self):
        with pytest.raises(ValueError):
            diag_dominance(SimilarityMatrix(ids=["a"], entries=np.ones((1, 1))))

    def test_equal_matrices_zero_db(self):
        m = self.hand_matrix([[0.9, 0.1], [0.3, 0.7]])
        assert gain_vd(m, m) == 0.0

    def test_ratio_10x_and_half(self):
        base = self.hand_matrix([[0.6, 0.4], [0.4, 0.6]])  # dominance 0.2
        up = self.hand_matrix([[1.5, -0.5], [-0.5, 1.5]])  # dominance 2.0
        assert gain_vd(up, base) == pytest.approx(10.0, abs=1e-9)
        half = self.hand_matrix([[0.55, 0.45], [0.45, 0.55]])  # dominance 0.1
        assert gain_vd(half, base) == pytest.approx(-3.0102999566398116, abs=1e-9)

    def test_zero_original_dominance_rejected(self):
        flat = self.hand_matrix(np.full((2, 2), 0.5))
        live = self.hand_matrix(np.eye(2))
        with pytest.raises(ValueError, match="no diagonal dominance"):
            gain_vd(live, flat)

    def test_zero_anon_dominance_is_neg_inf_with_warning(self, caplog):
        flat = self.hand_matrix(np.full((2, 2), 0.5))
        live = self.hand_matrix(np.eye(2))
        with caplog.at_level(logging.WARNING, logger="saltkit.metrics"):
            value = gain_vd(flat, live)
        assert value == float("-inf")
        assert any("-inf" in rec.message for rec in caplog.records)


class TestWeightedAverage:
    def test_table_aggregation(self):
        weights = (0.25, 0.25, 0.20, 0.20, 0.05, 0.05)
        privacy = weighted_average((17.76, 6.37, 12.46, 9.33, 13.95, 13.11), weights)
        baseline = weighted_average((8.67, 1.24, 2.86, 1.44, 2.62, 1.43), weights)
        assert privacy == pytest.approx(11.74, abs=0.005)
        assert baseline == pytest.approx(3.54, abs=0.005)

    def test_uniform_is_mean(self):
        vals = [3.0, 5.0, 10.0]
        assert weighted_average(vals, np.full(3, 1 / 3)) == pytest.approx(6.0, abs=1e-12)

    def test_bad_sum_rejected(self):
        with pytest.raises(ValueError, match="weights sum"):
            weighted_average([1.0, 2.0], [0.5, 0.4])


class TestPCA:
    def test_rank1_line(self):
        t = gaussians(3, 50)
        data = np.outer(t, [1.0, 2.0, -1.0]) + np.array([5.0, 0.0, 1.0])
        projected, ratios = pca_project(data)
        assert ratios[0] == pytest.approx(1.0, abs=1e-6)
        assert projected.shape == (50, 2)
        # all variance on the first axis
        assert np.var(projected[:, 1]) <= 1e-9 * np.var(projected[:, 0])

    def test_rank2_plane_in_10d(self):
        u = gaussians(4, 200)
        v = gaussians(5, 200)
        basis1 = gaussians(6, 10)
        basis2 = gaussians(7, 10)
        data = np.outer(u, basis1) + np.outer(v, basis2)
        _, ratios = pca_project(data)
        assert ratios.sum() >= 0.999

    def test_isotropic_gaussian_splits_evenly(self):
        data = gaussians(8, 20_000).reshape(10_000, 2)
        _, ratios = pca_project(data)
        assert ratios[0] == pytest.approx(0.5, abs=0.02)
        assert ratios[1] == pytest.approx(0.5, abs=0.02)

    def test_ratios_non_increasing_and_bounded(self):
        for seed in range(5):
            data = gaussians(seed, 120).reshape(30, 4)
            _, ratios = pca_project(data)
            assert ratios[0] >= ratios[1] >= 0.0
            assert ratios.sum() <= 1.0 + 1e-12

    def test_repeat_runs_identical(self):
        data = gaussians(11, 90).reshape(30, 3)
        p1, r1 = pca_project(data)
        p2, r2 = pca_project(data)
        assert np.array_equal(p1, p2) and np.array_equal(r1, r2)

    def test_projection_idempotent(self):
        data = gaussians(12, 120).reshape(40, 3)
        projected, _ = pca_project(data)
        again, _ = pca_project(projected)
        np.testing.assert_allclose(again, projected, atol=1e-9)

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            pca_project(np.ones((5, 3)))

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            pca_project(np.ones((2, 3)))
        with pytest.raises(ValueError):
            pca_project(gaussians(1, 6).reshape(6, 1))
