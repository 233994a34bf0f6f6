"""Tests for translation search in 3D point-set registration."""

import math

import numpy as np
import pytest

from src.datagen.synthetic import gen_reg3d_corr, gen_reg3d_corrless
from src.models.data_models import Cube, RiPair, SceneConfig
from src.problems.reg3d import (
    Acm2CorrBounder,
    Acm2CorrlessBounder,
    Plain3DCorrBounder,
    Plain3DCorrlessBounder,
    branch_box,
    build_ri_pairs,
    corr_arrays,
    corr_residuals,
    relative_translation_error,
    ri_pair_arrays,
    ri_pair_residuals,
    score_unique_matches,
    solve_reg3d_corr,
    solve_reg3d_corrless,
    translation_leaf_size,
)
from src.utils.errors import ConfigurationError

UNIT_BOX = Cube(-np.ones(3), np.ones(3))


def _strict_count(residuals, eps, max_depth):
    """残差在真值处留出叶子半径余量的约束数，两种方法都必须至少找到这么多"""
    slack = translation_leaf_size(UNIT_BOX, max_depth) / 2.0
    return int(np.count_nonzero(residuals <= eps - slack))


@pytest.fixture
def corr_scene():
    cfg = SceneConfig(n_points=60, outlier_ratio=0.5, seed=31, noise_sigma=0.0)
    return gen_reg3d_corr(cfg)


@pytest.fixture
def corrless_scene():
    cfg = SceneConfig(n_points=20, seed=13)
    P, Q, truth = gen_reg3d_corrless(cfg, overlap=0.8)
    return P, Q, truth, build_ri_pairs(P, Q, tau=0.002, keep=1000)


class TestCorrespondences:
    def test_residual_vanishes_on_inliers(self, corr_scene):
        corrs, truth = corr_scene
        residuals = corr_residuals(corrs, truth.translation)
        assert np.max(residuals[truth.inlier_mask]) < 1e-12

    @pytest.mark.parametrize("method", ["plain", "acm"])
    def test_finds_all_inliers(self, corr_scene, method):
        corrs, truth = corr_scene
        eps, depth = 0.05, 8
        report = solve_reg3d_corr(corrs, method, eps, depth, box=UNIT_BOX)
        strict = _strict_count(corr_residuals(corrs, truth.translation), eps, depth)
        assert strict >= int(truth.inlier_mask.sum())
        assert report.best_count >= strict
        assert report.best_param.shape == (3,)
        achieved = np.count_nonzero(corr_residuals(corrs, report.best_param) <= eps + 1e-9)
        assert achieved >= report.best_count

    def test_acm_respects_t3_box(self, corr_scene):
        corrs, _ = corr_scene
        report = solve_reg3d_corr(corrs, "acm", 0.05, 6, box=UNIT_BOX, restrict_t3=True)
        assert -1.0 <= report.best_param[2] <= 1.0

    def test_default_box(self, corr_scene):
        corrs, _ = corr_scene
        report = solve_reg3d_corr(corrs, "acm", 0.05, 5)
        assert report.best_count > 0

    def test_unknown_method(self, corr_scene):
        with pytest.raises(ConfigurationError):
            solve_reg3d_corr(corr_scene[0], "icp", 0.05, 4)


class TestCorrespondenceBounds:
    def test_plain_upper_dominates_samples(self, corr_scene, rng):
        corrs, _ = corr_scene
        bounder = Plain3DCorrBounder(corrs, 0.05)
        for _ in range(20):
            lo = rng.uniform(-1.0, 0.5, 3)
            cube = Cube(lo, lo + rng.uniform(0.05, 0.5, 3))
            upper = bounder.upper(cube)
            for t in rng.uniform(cube.lo, cube.hi, size=(30, 3)):
                assert np.count_nonzero(corr_residuals(corrs, t) <= 0.05 - 1e-9) <= upper

    def test_acm_upper_dominates_free_t3(self, corr_scene, rng):
        corrs, _ = corr_scene
        bounder = Acm2CorrBounder(corrs, 0.05)
        t3_grid = np.linspace(-2.0, 2.0, 401)
        for _ in range(10):
            lo = rng.uniform(-1.0, 0.5, 2)
            cube = Cube(lo, lo + rng.uniform(0.05, 0.5, 2))
            upper = bounder.upper(cube)
            for t1, t2 in rng.uniform(cube.lo, cube.hi, size=(5, 2)):
                best = max(
                    np.count_nonzero(corr_residuals(corrs, [t1, t2, t3]) <= 0.05 - 1e-9)
                    for t3 in t3_grid
                )
                assert best <= upper

    def test_branch_box_drops_third_axis(self):
        box = branch_box(Cube([-1.0, -2.0, -3.0], [1.0, 2.0, 3.0]))
        assert box.n == 2
        assert np.array_equal(box.hi, [1.0, 2.0])


class TestRiPairs:
    def test_validation(self):
        P = np.zeros((4, 3))
        with pytest.raises(ConfigurationError):
            build_ri_pairs(P, P, tau=0.0)
        with pytest.raises(ConfigurationError):
            build_ri_pairs(P, P, tau=0.1, keep=0)
        assert build_ri_pairs(P[:1], P, tau=0.1) == []

    def test_both_orientations(self, corrless_scene):
        _, _, _, pairs = corrless_scene
        assert pairs and len(pairs) % 2 == 0
        for first, second in zip(pairs[::2], pairs[1::2]):
            assert np.array_equal(first.p1, second.p2)
            assert np.array_equal(first.p2, second.p1)
            assert first.q_index == second.q_index

    def test_length_tolerance(self, corrless_scene):
        _, _, _, pairs = corrless_scene
        for pair in pairs:
            p_len = np.linalg.norm(pair.p1 - pair.p2)
            q_len = np.linalg.norm(pair.q1 - pair.q2)
            assert abs(p_len - q_len) <= 0.002 + 1e-12

    def test_keep_limits_segments(self, rng):
        P = rng.uniform(-1, 1, (30, 3))
        pairs = build_ri_pairs(P, P.copy(), tau=1e-9, keep=5)
        q_segments = {tuple(sorted(pair.q_index)) for pair in pairs}
        assert len(q_segments) <= 5

    def test_score_unique_matches(self):
        a, b = np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
        far = np.array([10.0, 0.0, 0.0])
        pairs = [
            RiPair(a, b, a, b, (0, 1), (0, 1)),
            RiPair(b, a, a, b, (1, 0), (0, 1)),
            RiPair(a, b, far, b, (0, 1), (2, 1)),
        ]
        # 第一条 Q 线段的两个候选都满足，只计一次；第二条不满足
        assert score_unique_matches(pairs, np.zeros(3), 1e-6) == 1


class TestCorrespondenceFree:
    @pytest.mark.parametrize("method", ["plain", "acm"])
    def test_finds_consistent_pairs(self, corrless_scene, method):
        _, _, truth, pairs = corrless_scene
        eps, depth = 0.02, 7
        report = solve_reg3d_corrless(pairs, method, UNIT_BOX, eps, depth)
        strict = _strict_count(ri_pair_residuals(pairs, truth.translation), eps, depth)
        n_overlap = int(truth.inlier_mask.sum())
        # 每对重叠点的正确方向都一致
        assert strict >= n_overlap * (n_overlap - 1) // 2
        assert report.best_count >= strict

    def test_union_upper_not_below_intersection(self, corrless_scene, rng):
        _, _, _, pairs = corrless_scene
        both = Acm2CorrlessBounder(pairs, 0.02)
        either = Acm2CorrlessBounder(pairs, 0.02, union_mode=True)
        for lo in rng.uniform(-1.0, 0.5, size=(10, 2)):
            cube = Cube(lo, lo + 0.25)
            assert either.upper(cube) >= both.upper(cube)

    def test_plain_upper_dominates_samples(self, corrless_scene, rng):
        _, _, _, pairs = corrless_scene
        bounder = Plain3DCorrlessBounder(pairs, 0.02)
        for _ in range(10):
            lo = rng.uniform(-1.0, 0.5, 3)
            cube = Cube(lo, lo + 0.3)
            upper = bounder.upper(cube)
            for t in rng.uniform(cube.lo, cube.hi, size=(20, 3)):
                assert np.count_nonzero(ri_pair_residuals(pairs, t) <= 0.02 - 1e-9) <= upper

    def test_acm_lower_witness(self, corrless_scene):
        _, _, truth, pairs = corrless_scene
        bounder = Acm2CorrlessBounder(pairs, 0.02, t3_range=(-1.0, 1.0))
        t1, t2 = truth.translation[:2]
        count, witness = bounder.lower(Cube([t1 - 1e-3, t2 - 1e-3], [t1 + 1e-3, t2 + 1e-3]))
        assert witness[:2] == pytest.approx([t1, t2])
        assert np.count_nonzero(ri_pair_residuals(pairs, witness) <= 0.02 + 1e-9) >= count

    def test_empty_pairs(self):
        report = solve_reg3d_corrless([], "acm", UNIT_BOX, 0.01, 4)
        assert report.best_count == 0


def test_relative_translation_error():
    assert relative_translation_error([1.0, 0.0, 0.0], [2.0, 0.0, 0.0]) == pytest.approx(0.5)
    assert relative_translation_error([0.3, 0.4, 0.0], [0.0, 0.0, 0.0]) == pytest.approx(0.5)


def test_translation_leaf_size():
    assert translation_leaf_size(UNIT_BOX, 10) == pytest.approx(2 * math.sqrt(3) / 1024)


def _corr_scene(seed, n_points=40, outlier_ratio=0.9):
    cfg = SceneConfig(n_points=n_points, outlier_ratio=outlier_ratio, seed=seed, noise_sigma=0.0)
    return gen_reg3d_corr(cfg)


def _grid(n):
    axis = np.linspace(-1.0, 1.0, n)
    return axis, (axis[1] - axis[0]) * math.sqrt(3) / 2.0


def _grid_residuals(p, q_norm, points):
    """points: (K, 3)，返回 (K, M) 残差矩阵"""
    return np.abs(q_norm[None, :] - np.linalg.norm(p[None, :, :] + points[:, None, :], axis=2))


class TestPairedOptimality:
    EPS = 0.05
    DEPTH = 8

    def test_corr_acm_and_plain_bracket_each_other(self):
        # 残差关于 t 是 1-Lipschitz，平凡叶子中心到 ACM 见证点的距离不超过叶子半对角线
        shrunk = self.EPS - translation_leaf_size(UNIT_BOX, self.DEPTH) / 2.0 - 1e-9
        for seed in range(5):
            corrs, _ = _corr_scene(seed)
            acm = solve_reg3d_corr(corrs, "acm", self.EPS, self.DEPTH, box=UNIT_BOX)
            plain = solve_reg3d_corr(corrs, "plain", self.EPS, self.DEPTH, box=UNIT_BOX)
            covered = int(np.count_nonzero(corr_residuals(corrs, acm.best_param) <= shrunk))
            assert acm.best_count >= plain.best_count >= covered

    def test_corrless_acm_and_plain_bracket_each_other(self, corrless_scene):
        _, _, _, pairs = corrless_scene
        eps, depth = 0.02, 7
        shrunk = eps - translation_leaf_size(UNIT_BOX, depth) / 2.0 - 1e-9
        acm = solve_reg3d_corrless(pairs, "acm", UNIT_BOX, eps, depth)
        plain = solve_reg3d_corrless(pairs, "plain", UNIT_BOX, eps, depth)
        covered = int(np.count_nonzero(ri_pair_residuals(pairs, acm.best_param) <= shrunk))
        assert acm.best_count >= plain.best_count >= covered

    def test_grid_oracle(self):
        corrs, _ = _corr_scene(23, n_points=20, outlier_ratio=0.5)
        p, q = corr_arrays(corrs)
        q_norm = np.linalg.norm(q, axis=1)
        axis, grid_slack = _grid(100)
        leaf_slack = translation_leaf_size(UNIT_BOX, self.DEPTH) / 2.0
        thresholds = {
            "strict": self.EPS - leaf_slack - 1e-9,
            "eps": self.EPS,
            "loose": self.EPS + grid_slack + 1e-9,
        }
        best = dict.fromkeys(thresholds, 0)
        t2, t3 = np.meshgrid(axis, axis, indexing="ij")
        for t1 in axis:
            points = np.column_stack([np.full(t2.size, t1), t2.ravel(), t3.ravel()])
            residuals = _grid_residuals(p, q_norm, points)
            for key, limit in thresholds.items():
                best[key] = max(best[key], int((residuals <= limit).sum(axis=1).max()))

        assert best["loose"] >= best["eps"] >= best["strict"]
        for method in ("plain", "acm"):
            report = solve_reg3d_corr(corrs, method, self.EPS, self.DEPTH, box=UNIT_BOX)
            assert best["loose"] >= report.best_count >= best["strict"]

    def test_corr_fewer_iterations_at_high_outlier_ratio(self):
        ratios = []
        for seed in range(5):
            corrs, _ = _corr_scene(seed, n_points=50)
            acm = solve_reg3d_corr(corrs, "acm", self.EPS, self.DEPTH, box=UNIT_BOX)
            plain = solve_reg3d_corr(corrs, "plain", self.EPS, self.DEPTH, box=UNIT_BOX)
            assert acm.iterations < plain.iterations
            ratios.append(plain.iterations / acm.iterations)
        assert float(np.median(ratios)) > 2.0

    def test_corrless_fewer_iterations_at_low_overlap(self):
        ratios = []
        for seed in range(3):
            P, Q, _ = gen_reg3d_corrless(SceneConfig(n_points=20, seed=seed), overlap=0.2)
            pairs = build_ri_pairs(P, Q, tau=0.002, keep=1000)
            acm = solve_reg3d_corrless(pairs, "acm", UNIT_BOX, 0.02, 6)
            plain = solve_reg3d_corrless(pairs, "plain", UNIT_BOX, 0.02, 6)
            assert acm.iterations < plain.iterations
            ratios.append(plain.iterations / acm.iterations)
        assert float(np.median(ratios)) > 2.0


class TestUniqueMatchObjective:
    """按 RI pair 计数的最优解同时也是按 Q 线段去重计数的最优解"""

    EPS = 1e-3

    @staticmethod
    def _scores(pairs, points, eps):
        p1, p2, q1, q2 = ri_pair_arrays(pairs)
        r1 = _grid_residuals(p1, np.linalg.norm(q1, axis=1), points)
        r2 = _grid_residuals(p2, np.linalg.norm(q2, axis=1), points)
        satisfied = np.maximum(r1, r2) <= eps
        keys = np.sort(np.array([pair.q_index for pair in pairs]), axis=1)
        _, group = np.unique(keys, axis=0, return_inverse=True)
        group = group.ravel()
        unique = np.zeros((points.shape[0], group.max() + 1), dtype=bool)
        for g in range(unique.shape[1]):
            unique[:, g] = satisfied[:, group == g].any(axis=1)
        return satisfied.sum(axis=1), unique.sum(axis=1)

    def test_pair_count_maximizer_maximizes_unique_count(self, corrless_scene):
        _, _, truth, pairs = corrless_scene
        axis, _ = _grid(25)
        mesh = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
        candidates = np.vstack([mesh, truth.translation[None, :]])

        pair_scores, unique_scores = [], []
        for chunk in np.array_split(candidates, 16):
            a, b = self._scores(pairs, chunk, self.EPS)
            pair_scores.append(a)
            unique_scores.append(b)
        pair_scores = np.concatenate(pair_scores)
        unique_scores = np.concatenate(unique_scores)

        best = int(np.argmax(pair_scores))
        assert unique_scores[best] == unique_scores.max()
        assert score_unique_matches(pairs, candidates[best], self.EPS) == unique_scores[best]
        assert score_unique_matches(pairs, candidates[-1], self.EPS) == unique_scores[-1]
