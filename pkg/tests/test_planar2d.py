"""Tests for planar-motion relative pose (yaw plus translation direction)."""

import math

import numpy as np
import pytest

from src.core.engine import solve
from src.datagen.synthetic import gen_planar
from src.models.data_models import Cube, SceneConfig
from src.problems.planar2d import (
    Acm1Bounder,
    Plain2DBounder,
    THETA1_RANGE,
    build_planar_constraints,
    epipolar_residual,
    planar_residuals,
    plain2d_cube,
    solve_acm1,
    solve_plain2d,
    to_pose,
)

EPS = 0.02
MAX_DEPTH = 10


def _count_near(bounder, theta1, theta2, slack=0.0):
    return int(np.count_nonzero(bounder.residuals(theta1, theta2) <= bounder.eps + slack))


@pytest.fixture
def noiseless_planar():
    # 小角度、小平移，保证两个视图的点深度足够
    cfg = SceneConfig(
        n_points=40,
        noise_px=0.0,
        outlier_ratio=0.25,
        seed=17,
        angle_range=(-0.3, 0.3),
        translation_range=(-0.5, 0.5),
    )
    return gen_planar(cfg)


class TestPlanarConstraint:
    def test_matches_direct_epipolar_form(self, rng):
        cfg = SceneConfig(n_points=25, outlier_ratio=0.4, seed=4)
        corrs, _ = gen_planar(cfg)
        constraints = build_planar_constraints(corrs)
        bounder = Plain2DBounder(constraints, EPS)
        for theta, phi in rng.uniform(-math.pi, math.pi, size=(10, 2)):
            direct = np.abs([epipolar_residual(c, theta, phi) for c in corrs])
            assert np.allclose(bounder.residuals(theta - phi, phi), direct, atol=1e-12)
            assert np.allclose(planar_residuals(constraints, theta - phi, phi), direct, atol=1e-12)

    def test_vanishes_at_truth(self, noiseless_planar):
        corrs, truth = noiseless_planar
        bounder = Plain2DBounder(build_planar_constraints(corrs), EPS)
        residuals = bounder.residuals(truth.angles["theta1"], truth.angles["theta2"])
        assert np.max(residuals[truth.inlier_mask]) < 1e-12

    def test_half_turn_equivalence(self, rng):
        corrs, _ = gen_planar(SceneConfig(n_points=10, seed=2))
        bounder = Plain2DBounder(build_planar_constraints(corrs), EPS)
        theta1, theta2 = rng.uniform(-1, 1, 2)
        assert np.allclose(
            bounder.residuals(theta1, theta2),
            bounder.residuals(theta1 - math.pi, theta2 + math.pi),
        )

    def test_empty_input(self):
        assert build_planar_constraints([]) == []
        report = solve_acm1([], EPS, 4)
        assert report.best_count == 0


class TestBounds:
    def test_plain_upper_dominates_samples(self, rng):
        corrs, _ = gen_planar(SceneConfig(n_points=30, outlier_ratio=0.5, seed=8))
        bounder = Plain2DBounder(build_planar_constraints(corrs), EPS)
        for _ in range(30):
            lo = rng.uniform(-1.5, 1.0, 2)
            cube = Cube(lo, lo + rng.uniform(0.01, 0.5, 2))
            upper = bounder.upper(cube)
            for point in rng.uniform(cube.lo, cube.hi, size=(40, 2)):
                assert _count_near(bounder, *point, slack=-1e-9) <= upper

    def test_acm_upper_dominates_free_theta2(self, rng):
        constraints = build_planar_constraints(
            gen_planar(SceneConfig(n_points=30, outlier_ratio=0.5, seed=8))[0]
        )
        bounder = Acm1Bounder(constraints, EPS)
        theta2_grid = np.linspace(-math.pi, math.pi, 721)
        for _ in range(15):
            lo = rng.uniform(-1.5, 1.0)
            cube = Cube([lo], [lo + rng.uniform(0.01, 0.5)])
            upper = bounder.upper(cube)
            for theta1 in rng.uniform(cube.lo[0], cube.hi[0], 5):
                best = max(_count_near(bounder, theta1, t2, slack=-1e-9) for t2 in theta2_grid)
                assert best <= upper

    def test_acm_lower_is_exact_in_theta2(self, rng):
        constraints = build_planar_constraints(
            gen_planar(SceneConfig(n_points=30, outlier_ratio=0.3, seed=12))[0]
        )
        bounder = Acm1Bounder(constraints, EPS)
        theta2_grid = np.linspace(-math.pi, math.pi, 1441)
        for lo in rng.uniform(-1.5, 1.0, 10):
            cube = Cube([lo], [lo + 0.1])
            count, witness = bounder.lower(cube)
            assert witness[0] == pytest.approx(cube.center[0])
            assert _count_near(bounder, *witness, slack=1e-9) >= count
            grid_best = max(
                _count_near(bounder, witness[0], t2, slack=-1e-9) for t2 in theta2_grid
            )
            assert count >= grid_best


class TestSolvers:
    def test_both_recover_all_inliers(self, noiseless_planar):
        corrs, truth = noiseless_planar
        constraints = build_planar_constraints(corrs)
        n_inliers = int(truth.inlier_mask.sum())
        for report in (
            solve_acm1(constraints, EPS, MAX_DEPTH),
            solve_plain2d(constraints, EPS, MAX_DEPTH),
        ):
            assert report.best_count >= n_inliers
            assert report.best_param.shape == (2,)

    def test_reported_count_is_achieved(self):
        corrs, _ = gen_planar(SceneConfig(n_points=40, outlier_ratio=0.6, seed=21))
        constraints = build_planar_constraints(corrs)
        bounder = Plain2DBounder(constraints, EPS)
        for report in (
            solve_acm1(constraints, EPS, MAX_DEPTH),
            solve_plain2d(constraints, EPS, MAX_DEPTH),
        ):
            assert _count_near(bounder, *report.best_param, slack=1e-9) >= report.best_count

    def test_acm_pops_fewer_cubes(self):
        corrs, _ = gen_planar(SceneConfig(n_points=60, outlier_ratio=0.7, seed=5))
        constraints = build_planar_constraints(corrs)
        acm = solve_acm1(constraints, EPS, MAX_DEPTH)
        plain = solve_plain2d(constraints, EPS, MAX_DEPTH)
        # 一维分支树的规模远小于二维
        assert acm.iterations < plain.iterations

    def test_theta1_range_respected(self, noiseless_planar):
        corrs, _ = noiseless_planar
        report = solve_acm1(build_planar_constraints(corrs), EPS, 6)
        assert THETA1_RANGE[0] <= report.best_param[0] <= THETA1_RANGE[1]

    def test_theta2_range_clipped(self, noiseless_planar):
        corrs, _ = noiseless_planar
        report = solve_acm1(build_planar_constraints(corrs), EPS, 6, theta2_range=(0.0, 1.0))
        assert 0.0 <= report.best_param[1] <= 1.0


def test_to_pose():
    theta, phi = to_pose(np.array([0.25, -0.1]))
    assert theta == pytest.approx(0.15)
    assert phi == pytest.approx(-0.1)


def _leaf_halves(depth):
    """平凡 BnB 叶子在 θ1、θ2 方向的半宽"""
    widths = np.array([THETA1_RANGE[1] - THETA1_RANGE[0], 2 * math.pi]) / 2.0**depth
    return widths / 2.0


def _lipschitz_slack(bounder, halves):
    """逐约束：参数各分量移动不超过 halves 时残差的最大变化"""
    return bounder.A1 * halves[0] + bounder.A2 * halves[1]


class TestPairedOptimality:
    def test_acm_and_plain_bracket_each_other(self):
        halves = _leaf_halves(MAX_DEPTH)
        for seed in range(10):
            corrs, _ = gen_planar(SceneConfig(n_points=50, outlier_ratio=0.9, seed=seed))
            constraints = build_planar_constraints(corrs)
            bounder = Plain2DBounder(constraints, EPS)
            acm = solve_acm1(constraints, EPS, MAX_DEPTH)
            plain = solve_plain2d(constraints, EPS, MAX_DEPTH)
            # ACM 的见证点所在的平凡叶子中心处，残差至多增加一个 Lipschitz 余量
            shrunk = EPS - _lipschitz_slack(bounder, halves) - 1e-9
            covered = int(np.count_nonzero(bounder.residuals(*acm.best_param) <= shrunk))
            assert acm.best_count >= plain.best_count >= covered

    def test_grid_oracle(self):
        corrs, _ = gen_planar(SceneConfig(n_points=20, outlier_ratio=0.5, seed=6))
        constraints = build_planar_constraints(corrs)
        bounder = Plain2DBounder(constraints, EPS)
        acm = solve_acm1(constraints, EPS, MAX_DEPTH)
        plain = solve_plain2d(constraints, EPS, MAX_DEPTH)

        theta1 = np.linspace(*THETA1_RANGE, 2000)
        theta2 = np.linspace(-math.pi, math.pi, 2000)
        grid_halves = np.array([theta1[1] - theta1[0], theta2[1] - theta2[0]]) / 2.0
        acm_slack = bounder.A1 * _leaf_halves(MAX_DEPTH)[0]
        plain_slack = _lipschitz_slack(bounder, _leaf_halves(MAX_DEPTH))
        grid_slack = _lipschitz_slack(bounder, grid_halves)

        term2 = bounder.A2 * np.sin(theta2[:, None] + bounder.phi2)
        best = {"eps": 0, "acm": 0, "plain": 0, "loose": 0}
        thresholds = {
            "eps": EPS,
            "acm": EPS - acm_slack - 1e-9,
            "plain": EPS - plain_slack - 1e-9,
            "loose": EPS + grid_slack + 1e-9,
        }
        for t1 in theta1:
            residuals = np.abs(bounder.A1 * np.sin(t1 + bounder.phi1) + term2)
            for key, limit in thresholds.items():
                best[key] = max(best[key], int((residuals <= limit).sum(axis=1).max()))

        assert best["loose"] >= best["eps"] >= best["acm"] >= best["plain"]
        assert best["loose"] >= acm.best_count >= best["acm"]
        assert best["loose"] >= plain.best_count >= best["plain"]

    def test_acm_lower_at_least_plain_lower(self, recording):
        corrs, _ = gen_planar(SceneConfig(n_points=40, outlier_ratio=0.8, seed=19))
        constraints = build_planar_constraints(corrs)
        plain = recording(Plain2DBounder(constraints, EPS))
        solve(plain, plain2d_cube(), 8)
        acm = Acm1Bounder(constraints, EPS)
        for cube, evaluation in plain.visited:
            projected = Cube(cube.lo[:1], cube.hi[:1], cube.depth)
            count, witness = acm.lower(projected)
            assert witness[0] == pytest.approx(evaluation.lower_witness[0])
            assert count >= evaluation.lower

    def test_fewer_iterations_at_high_outlier_ratio(self):
        ratios = []
        for seed in range(9):
            corrs, _ = gen_planar(SceneConfig(n_points=50, outlier_ratio=0.9, seed=seed))
            constraints = build_planar_constraints(corrs)
            acm = solve_acm1(constraints, EPS, MAX_DEPTH)
            plain = solve_plain2d(constraints, EPS, MAX_DEPTH)
            assert acm.iterations < plain.iterations
            ratios.append(plain.iterations / acm.iterations)
        # 上下界都很紧时比值约为 (1+4d)/(1+2d) < 2
        assert float(np.median(ratios)) > 2.0
