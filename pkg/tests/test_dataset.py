import math
from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from advrsr.dataset import (
    SYMMETRIZE_MAX_N,
    AffineSubspace,
    LabeledDataset,
    NoiseSpec,
    add_noise,
    fixture_axis_split,
    fixture_heavy_axis,
    gen_adversarial_line,
    gen_affine_line_dataset,
    gen_general_position,
    gen_haystack,
    gen_line_outlier_dataset,
    inliers_on_truth,
    load_dataset,
    save_dataset,
    spherize,
    symmetrize,
    symmetrized_inlier_fraction,
)
from advrsr.errors import DimensionError, DivisibilityError, ZeroColumn
from advrsr.grassmann import Subspace, angles_to, random_subspace

seeds = st.integers(0, 2**32 - 1)


def test_spherize_examples():
    assert np.allclose(spherize(np.array([[3.0], [4.0]])), [[0.6], [0.8]])
    u = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert np.array_equal(spherize(u), u)
    with pytest.raises(ZeroColumn) as exc:
        spherize(np.array([[1.0, 0.0], [1.0, 0.0]]))
    assert exc.value.index == 1


@given(seeds)
def test_spherize_idempotent(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((5, 7)) * 10 ** rng.uniform(-6, 6, 7)
    once = spherize(X)
    twice = spherize(once)
    assert np.all(np.abs(twice - once) <= np.spacing(np.abs(once)) + 1e-300)
    assert np.allclose(np.linalg.norm(once, axis=0), 1.0)


def test_symmetrize_examples():
    X = np.eye(2)
    assert np.array_equal(symmetrize(X), (X[:, 0] - X[:, 1])[:, None])
    assert symmetrize(np.random.default_rng(0).standard_normal((3, 4))).shape == (3, 6)


def test_symmetrize_keeps_zero_columns_and_guards_size():
    X = np.c_[np.ones(2), np.ones(2), np.zeros(2)]
    assert np.all(symmetrize(X)[:, 0] == 0)
    with pytest.raises(DimensionError):
        symmetrize(np.zeros((1, SYMMETRIZE_MAX_N + 1)))
    with pytest.raises(DimensionError):
        symmetrize(np.zeros((2, 1)))


@given(st.integers(2, 12), seeds)
def test_symmetrize_lexicographic_antisymmetric(N, seed):
    X = np.random.default_rng(seed).standard_normal((3, N))
    Y = symmetrize(X)
    k = 0
    for i in range(N):
        for j in range(i + 1, N):
            assert np.array_equal(Y[:, k], X[:, i] - X[:, j])
            assert np.array_equal(Y[:, k], -(X[:, j] - X[:, i]))
            k += 1
    assert k == Y.shape[1] == comb(N, 2)


@given(st.integers(2, 40), st.data())
def test_symmetrized_inlier_fraction_exact(N, data):
    n_in = data.draw(st.integers(0, N))
    mask = np.r_[np.ones(n_in, bool), np.zeros(N - n_in, bool)]
    assert symmetrized_inlier_fraction(mask) == Fraction(comb(n_in, 2), comb(N, 2))


# ---------------------------------------------------------------- generators


def test_haystack_inliers_exactly_on_truth():
    ds = gen_haystack(20, 3, 50, 30, rng=np.random.default_rng(0))
    assert ds.n_in == 50 and ds.n_out == 30 and ds.snr == 50 / 30
    assert np.all(angles_to(ds.truth, ds.inliers) < 1e-12)
    assert inliers_on_truth(ds)


def test_haystack_no_outliers_rank_d():
    ds = gen_haystack(10, 4, 40, 0, rng=np.random.default_rng(1))
    C = ds.points @ ds.points.T
    s = np.linalg.svd(C, compute_uv=False)
    assert np.sum(s > 1e-10 * s[0]) == 4
    assert math.isinf(ds.snr)


def test_haystack_spherized_inlier_mean_shrinks():
    rng = np.random.default_rng(2)
    norms = []
    for n in (20, 200, 2000):
        ds = gen_haystack(10, 3, n, 1, rng=rng)
        norms.append(np.linalg.norm(spherize(ds.inliers).mean(axis=1)))
    assert norms[2] < norms[0]
    assert norms[2] < 0.1


def test_generators_reproducible():
    a = gen_haystack(8, 2, 10, 5, seed=7)
    b = gen_haystack(8, 2, 10, 5, seed=7)
    assert np.array_equal(a.points, b.points)
    c = gen_line_outlier_dataset(6, 2, 10, 3, seed=9)
    d = gen_line_outlier_dataset(6, 2, 10, 3, seed=9)
    assert np.array_equal(c.points, d.points)


def test_general_position_every_subset_spans():
    from itertools import combinations

    rng = np.random.default_rng(3)
    L = random_subspace(6, 3, rng)
    ds = gen_general_position(L, 8, rng)
    for idx in combinations(range(8), 3):
        assert np.linalg.matrix_rank(ds.points[:, idx], tol=1e-10) == 3
    assert np.allclose(np.linalg.norm(ds.points, axis=0), 1.0)


def test_general_position_d1_is_plus_minus_direction():
    rng = np.random.default_rng(4)
    L = random_subspace(4, 1, rng)
    ds = gen_general_position(L, 6, rng)
    for x in ds.points.T:
        assert min(np.linalg.norm(x - L.basis[:, 0]), np.linalg.norm(x + L.basis[:, 0])) < 1e-12


def test_adversarial_line_block():
    block = gen_adversarial_line([3.0, 4.0], 5, 10.0)
    assert block.shape == (2, 5)
    assert np.allclose(block, np.array([[6.0], [8.0]]))
    assert np.linalg.norm(spherize(block), 2) == pytest.approx(math.sqrt(5), abs=1e-12)
    assert gen_adversarial_line([1.0, 0.0], 1).shape == (2, 1)
    with pytest.raises(ValueError):
        gen_adversarial_line([0.0, 0.0], 2)


def test_affine_line_dataset_inliers_on_affine_truth():
    ds = gen_affine_line_dataset(8, 2, 20, 5, rng=np.random.default_rng(5))
    assert isinstance(ds.truth, AffineSubspace)
    assert inliers_on_truth(ds)
    assert np.max(np.abs(ds.truth.linear.basis.T @ ds.truth.offset)) < 1e-12


# ---------------------------------------------------------------- fixtures


def test_fixture_axis_split():
    ds = fixture_axis_split(2, 3, 10, 4)
    X = ds.points
    assert np.sum(np.all(X == np.eye(3)[:, [0]], axis=0)) == 5
    assert np.sum(np.all(X == np.eye(3)[:, [1]], axis=0)) == 5
    assert np.sum(np.all(X == np.eye(3)[:, [2]], axis=0)) == 4
    assert ds.truth == Subspace(np.eye(3)[:, :2])
    empty = fixture_axis_split(2, 3, 10, 0)
    assert math.isinf(empty.snr) and empty.N == 10
    with pytest.raises(DivisibilityError):
        fixture_axis_split(3, 4, 10, 0)
    with pytest.raises(DimensionError):
        fixture_axis_split(3, 3, 9, 0)


def test_fixture_heavy_axis():
    ds = fixture_heavy_axis(3, 4, 10, 0)
    X = ds.points
    E = np.eye(4)
    assert np.sum(np.all(X == E[:, [0]], axis=0)) == 8
    assert np.any(np.all(np.isclose(X, math.sqrt(8) * E[:, [1]]), axis=0))
    assert np.any(np.all(np.isclose(X, math.sqrt(8) * E[:, [2]]), axis=0))
    with pytest.raises(DimensionError):
        fixture_heavy_axis(1, 3, 5, 0)


# ---------------------------------------------------------------- noise


def test_noise_zero_is_identity():
    ds = gen_haystack(6, 2, 10, 3, seed=1)
    assert add_noise(ds, NoiseSpec(0.0, "uniform-ball"), seed=2) is ds


@pytest.mark.parametrize("kind", ["gaussian-clipped", "uniform-ball"])
def test_noise_bounded_and_inliers_only(kind):
    ds = gen_haystack(6, 2, 200, 20, seed=3)
    eps = 1e-3
    nd = add_noise(ds, NoiseSpec(eps, kind), seed=4)
    delta = nd.points - ds.points
    assert np.all(delta[:, ~ds.inlier_mask] == 0)
    norms = np.linalg.norm(delta[:, ds.inlier_mask], axis=0)
    assert np.all(norms <= eps * (1 + 1e-12))
    B = ds.truth.basis
    dist = np.linalg.norm(nd.inliers - B @ (B.T @ nd.inliers), axis=0)
    assert np.max(dist) <= eps * (1 + 1e-12)
    assert nd.truth is ds.truth


def test_uniform_ball_norms_fill_interval():
    ds = gen_haystack(3, 1, 4000, 1, seed=5)
    nd = add_noise(ds, NoiseSpec(1.0, "uniform-ball"), seed=6)
    r = np.linalg.norm((nd.points - ds.points)[:, ds.inlier_mask], axis=0)
    hist, _ = np.histogram(r, bins=10, range=(0, 1))
    assert np.all(hist > 0)
    assert r.min() > 0 and r.max() <= 1


# ---------------------------------------------------------------- files


def test_save_load_roundtrip(tmp_path):
    ds = gen_line_outlier_dataset(5, 2, 9, 3, magnitude=1e9, seed=8)
    p = tmp_path / "ds.txt"
    save_dataset(ds, p)
    back = load_dataset(p)
    assert np.array_equal(back.points, ds.points)
    assert np.array_equal(back.inlier_mask, ds.inlier_mask)
    assert np.array_equal(back.truth.basis, ds.truth.basis)
    assert back.meta["generator"] == ds.meta["generator"]


def test_save_load_affine_and_no_truth(tmp_path):
    ds = gen_affine_line_dataset(4, 1, 6, 2, seed=9)
    save_dataset(ds, tmp_path / "a.txt")
    back = load_dataset(tmp_path / "a.txt")
    assert back.truth == ds.truth
    bare = LabeledDataset(np.ones((2, 3)), [True, True, False])
    save_dataset(bare, tmp_path / "b.txt")
    assert load_dataset(tmp_path / "b.txt").truth is None


def test_load_malformed(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("3 2 0\n1 2\n")
    with pytest.raises(ValueError):
        load_dataset(p)
