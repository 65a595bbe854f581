import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from advrsr.dataset import (
    LabeledDataset,
    fixture_axis_split,
    fixture_heavy_axis,
    gen_general_position,
    with_outliers,
)
from advrsr.errors import OffSubspace, RankDeficientData, TooLarge
from advrsr.grassmann import Subspace, random_subspace
from advrsr.oracles import (
    COMAXIMIZER_CAP,
    Status,
    WellDefined,
    count_on,
    directional_l0_min,
    l0_bruteforce,
    snr_and_thresholds,
    well_defined_check,
)

seeds = st.integers(0, 2**32 - 1)
E3 = np.eye(3)


def gp_with_line(D, d, N_in, N_out, seed):
    rng = np.random.default_rng(seed)
    L = random_subspace(D, d, rng)
    inl = gen_general_position(L, N_in, rng)
    p = rng.standard_normal(D)
    return with_outliers(inl, np.repeat(p[:, None], N_out, axis=1))


# ---------------------------------------------------------------- l0_bruteforce


def test_l0_axis_split_unique_at_four():
    r = l0_bruteforce(fixture_axis_split(2, 3, 10, 4).points, 2)
    assert r.status is Status.UNIQUE
    assert r.best_count == 10
    assert r.best == Subspace(E3[:, :2])


def test_l0_axis_split_three_way_tie_at_five():
    r = l0_bruteforce(fixture_axis_split(2, 3, 10, 5).points, 2)
    assert r.status is Status.TIE
    assert r.best_count == 10
    planes = [Subspace(E3[:, [0, 1]]), Subspace(E3[:, [0, 2]]), Subspace(E3[:, [1, 2]])]
    assert len(r.co_maximizers) == 3
    for P in planes:
        assert any(P == S for S in r.co_maximizers)


def test_l0_independent_points_only():
    X = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    r = l0_bruteforce(X, 2)
    assert r.status is Status.UNIQUE and r.best_count == 2


def test_l0_counts_duplicates_with_multiplicity():
    X = np.c_[E3[:, 0], E3[:, 0], -2 * E3[:, 0], E3[:, 1], 5 * E3[:, 1], np.ones(3)]
    r = l0_bruteforce(X, 2)
    assert r.status is Status.UNIQUE and r.best_count == 5
    assert r.best == Subspace(E3[:, :2])


def test_l0_errors():
    with pytest.raises(TooLarge):
        l0_bruteforce(np.ones((3, 26)), 2)
    with pytest.raises(RankDeficientData):
        l0_bruteforce(np.c_[E3[:, 0], 3 * E3[:, 0]], 2)


def test_l0_cap_truncates():
    # points in general position in R^3 with d = 2: every pair of the 13
    # points spans a plane holding exactly 2 points, 78 co-maximizers
    rng = np.random.default_rng(0)
    X = rng.standard_normal((3, 13))
    r = l0_bruteforce(X, 2)
    assert r.status is Status.TIE and r.best_count == 2
    assert r.truncated and len(r.co_maximizers) == COMAXIMIZER_CAP


@given(seeds)
def test_l0_count_invariances(seed):
    rng = np.random.default_rng(seed)
    ds = gp_with_line(4, 2, 7, int(rng.integers(0, 7)), seed)
    X = ds.points
    base = l0_bruteforce(X, 2).best_count
    perm = X[:, rng.permutation(X.shape[1])]
    scaled = X * 10 ** rng.uniform(-6, 6, X.shape[1])
    Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    assert l0_bruteforce(perm, 2).best_count == base
    assert l0_bruteforce(scaled, 2).best_count == base
    assert l0_bruteforce(Q @ X, 2).best_count == base


@given(seeds)
def test_l0_best_count_matches_membership(seed):
    ds = gp_with_line(4, 2, 6, 3, seed)
    r = l0_bruteforce(ds.points, 2)
    assert count_on(r.best, ds.points) == r.best_count


# ---------------------------------------------------------------- directional


def test_directional_general_position():
    rng = np.random.default_rng(1)
    L = random_subspace(5, 3, rng)
    assert directional_l0_min(gen_general_position(L, 8, rng).points, L) == 6


def test_directional_heavy_axis_is_one():
    ds = fixture_heavy_axis(3, 4, 10, 0)
    assert directional_l0_min(ds.inliers, ds.truth) == 1


def test_directional_identical_points_is_zero():
    L = Subspace(E3[:, :2])
    X = np.repeat(np.array([[1.0], [1.0], [0.0]]), 5, axis=1)
    assert directional_l0_min(X, L) == 0


def test_directional_off_subspace():
    L = Subspace(E3[:, :2])
    with pytest.raises(OffSubspace) as exc:
        directional_l0_min(np.c_[E3[:, 0], E3[:, 2]], L)
    assert exc.value.index == 1


@given(seeds, st.integers(2, 4), st.integers(0, 6))
def test_directional_upper_bound(seed, d, extra):
    rng = np.random.default_rng(seed)
    L = random_subspace(d + 1, d, rng)
    N = d + extra
    # mix of general points and repeats so the bound is not always tight
    X = np.array(gen_general_position(L, N, rng).points)
    if N > 2:
        X[:, 1] = 3 * X[:, 0]
    assert directional_l0_min(X, L) <= N - (d - 1)


# ---------------------------------------------------------------- well-definedness


def test_well_defined_repeated_outlier_flip():
    for seed in range(3):
        for n_out in range(0, 10):
            ds = gp_with_line(3, 2, 9, n_out, seed)
            N = 9 + n_out
            got = well_defined_check(ds)
            assert (got is WellDefined.WELL_DEFINED) == (n_out < (N - 2 + 1) / 2)


def test_well_defined_axis_split_beaten_past_threshold():
    assert well_defined_check(fixture_axis_split(2, 3, 10, 6)) is WellDefined.BEATEN


def test_well_defined_degenerate_inliers():
    X = np.c_[E3[:, 0], 2 * E3[:, 0], -E3[:, 0], E3[:, 2]]
    ds = LabeledDataset(X, [True, True, True, False], Subspace(E3[:, :2]))
    assert well_defined_check(ds) is WellDefined.DEGENERATE


def test_well_defined_monotone_ladder():
    order = {WellDefined.WELL_DEFINED: 0, WellDefined.TIE: 1, WellDefined.BEATEN: 2}
    for seed in range(3):
        ranks = [order[well_defined_check(gp_with_line(4, 3, 8, k, seed))] for k in range(0, 10)]
        assert ranks == sorted(ranks)
    ranks = [order[well_defined_check(fixture_axis_split(2, 3, 10, k))] for k in range(0, 9)]
    assert ranks == sorted(ranks)


def test_directional_bound_soundness_on_fixtures():
    cases = [gp_with_line(D, d, n, k, s) for s in range(4) for (D, d, n) in ((3, 2, 7), (4, 3, 9))
             for k in range(0, 20 - n)]
    cases += [fixture_axis_split(2, 3, 10, k) for k in range(0, 10)]
    cases += [fixture_heavy_axis(3, 4, 10, k) for k in range(0, 10)]
    for ds in cases:
        if ds.N > 20:
            continue
        rec = snr_and_thresholds(ds)
        if rec.snr > rec.directional_bound:
            assert well_defined_check(ds) is WellDefined.WELL_DEFINED


# ---------------------------------------------------------------- thresholds


def test_thresholds_arithmetic():
    X = np.random.default_rng(2).standard_normal((6, 100))
    ds = LabeledDataset(X, np.r_[np.ones(60, bool), np.zeros(40, bool)])
    rec = snr_and_thresholds(ds, 5)
    assert rec.information_bound == pytest.approx(104 / 96)
    assert rec.hardness_bound == pytest.approx(5.0)
    assert rec.snr == 1.5
    assert rec.directional_bound is None


def test_thresholds_directional_general_position():
    rng = np.random.default_rng(3)
    L = random_subspace(5, 3, rng)
    ds = with_outliers(gen_general_position(L, 20, rng), rng.standard_normal((5, 2)))
    rec = snr_and_thresholds(ds)
    assert rec.directional_l0 == 18
    assert rec.directional_bound == pytest.approx(20 / 18)


def test_thresholds_ill_posed_and_no_outliers():
    L = Subspace(E3[:, :2])
    X = np.repeat(np.array([[1.0], [0.0], [0.0]]), 4, axis=1)
    rec = snr_and_thresholds(LabeledDataset(X, np.ones(4, bool), L))
    assert rec.ill_posed and math.isinf(rec.directional_bound)
    assert math.isinf(rec.snr)
