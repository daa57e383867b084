import math

import numpy as np
import pytest

from conftest import (
    naive_closest_mean,
    naive_lc,
    naive_mc,
    naive_mdf,
    naive_pdm,
    naive_pdm_inner,
    naive_sc,
    naive_var,
    naive_var_inner,
    random_rotation,
    random_streamline,
    rigid_motion,
)
from tractodist.distances import (
    LC,
    MC,
    SC,
    DistanceKind,
    d_lc,
    d_mc,
    d_mdf,
    d_pdm,
    d_sc,
    d_varifolds,
    default_kinds,
    distance,
    distance_matrix,
    mdf,
    mdf_min_direct_flipped,
    mean_closest_asym,
    parse_kind,
    pdm,
    pdm_inner,
    resample_stack,
    segments,
    varifolds,
    varifolds_inner,
)
from tractodist.model import build_streamline, flip

S = build_streamline


# ---------------------------------------------------------------------------
# Kind parsing and canonical strings
# ---------------------------------------------------------------------------

def test_canonical_strings_roundtrip():
    for kind, text in [
        (MC, "mc"), (SC, "sc"), (LC, "lc"),
        (mdf(12), "mdf-12"), (mdf(20), "mdf-20"), (mdf(32), "mdf-32"),
        (pdm(42.0), "pdm-42.0"), (varifolds(42.0), "var-42.0"),
    ]:
        assert str(kind) == text
        assert parse_kind(text) == kind


def test_parse_accepts_arbitrary_positive_params():
    assert parse_kind("mdf-7") == mdf(7)
    assert parse_kind("pdm-3.5") == pdm(3.5)
    assert parse_kind("VAR-10") == varifolds(10.0)


def test_parse_rejects_garbage():
    for text in ("", "frechet", "mdf", "mdf-1", "mdf-x", "pdm", "pdm-0", "var--3", "mc-2"):
        with pytest.raises(ValueError):
            parse_kind(text)


def test_kind_validation():
    with pytest.raises(ValueError):
        DistanceKind("mdf", 1)
    with pytest.raises(ValueError):
        DistanceKind("pdm", -1.0)
    with pytest.raises(ValueError):
        DistanceKind("bogus")


def test_default_kinds_order():
    assert [str(k) for k in default_kinds()] == [
        "mc", "sc", "lc", "mdf-12", "mdf-20", "mdf-32", "pdm-42.0", "var-42.0",
    ]


# ---------------------------------------------------------------------------
# Mean-of-closest family
# ---------------------------------------------------------------------------

def test_mean_closest_asym_exhaustive_oracle():
    # Closest distances from each point of a, by exhaustive min over pairs.
    a = S([[0, 0, 0], [1, 0, 0]])
    b = S([[3, 4, 0], [3, 4, 1]])
    expected = naive_closest_mean(a.points, b.points)
    assert expected == pytest.approx((5.0 + math.sqrt(4 + 16)) / 2, rel=1e-12)
    assert mean_closest_asym(a, b) == pytest.approx(expected, rel=1e-9)


def test_mean_closest_asym_second_fixture():
    a = S([[0, 0, 0], [1, 0, 0]])
    b = S([[0, 1, 0], [0, 1, 1]])
    expected = naive_closest_mean(a.points, b.points)
    assert expected == pytest.approx((1 + math.sqrt(2)) / 2, rel=1e-12)
    assert mean_closest_asym(a, b) == pytest.approx(expected, rel=1e-9)


def test_mc_hand_expansion():
    a = S([[0, 0, 0], [1, 0, 0]])
    b = S([[0, 1, 0], [0, 1, 1]])
    expected = (naive_closest_mean(a.points, b.points)
                + naive_closest_mean(b.points, a.points)) / 2
    assert expected == pytest.approx(1.20711, abs=5e-6)
    assert d_mc(a, b) == pytest.approx(expected, rel=1e-9)


def test_sc_lc_asymmetric_fixture():
    a = S([[0, 0, 0], [1, 0, 0], [2, 0, 0]])
    b = S([[0, 0, 0], [0, 0, 0.001]])
    ab = naive_closest_mean(a.points, b.points)
    ba = naive_closest_mean(b.points, a.points)
    assert ba < 0.001 and ab >= 1.0
    assert d_sc(a, b) == pytest.approx(min(ab, ba), rel=1e-9)
    assert d_lc(a, b) == pytest.approx(max(ab, ba), rel=1e-9)
    assert d_lc(a, b) == pytest.approx(1.0, abs=1e-2)


def test_mc_family_random_vs_oracle():
    rng = np.random.default_rng(21)
    for _ in range(30):
        a = random_streamline(rng, int(rng.integers(2, 12)))
        b = random_streamline(rng, int(rng.integers(2, 12)))
        assert d_mc(a, b) == pytest.approx(naive_mc(a.points, b.points), rel=1e-9)
        assert d_sc(a, b) == pytest.approx(naive_sc(a.points, b.points), rel=1e-9)
        assert d_lc(a, b) == pytest.approx(naive_lc(a.points, b.points), rel=1e-9)


def test_sc_mc_lc_ordering_random():
    rng = np.random.default_rng(22)
    for _ in range(50):
        a, b = random_streamline(rng), random_streamline(rng)
        assert d_sc(a, b) <= d_mc(a, b) <= d_lc(a, b)


# ---------------------------------------------------------------------------
# MDF
# ---------------------------------------------------------------------------

def test_mdf_hand_expansion():
    # Parallel unit segments at height 1: direct pairing 1, flipped sqrt(2).
    a = S([[0, 0, 0], [1, 0, 0]])
    b = S([[0, 1, 0], [1, 1, 0]])
    direct = (math.dist((0, 0, 0), (0, 1, 0)) + math.dist((1, 0, 0), (1, 1, 0))) / 2
    flipped = (math.dist((0, 0, 0), (1, 1, 0)) + math.dist((1, 0, 0), (0, 1, 0))) / 2
    assert (direct, flipped) == (1.0, math.sqrt(2))
    assert d_mdf(a, b, 2) == pytest.approx(min(direct, flipped), rel=1e-9)


def test_mdf_random_vs_oracle():
    rng = np.random.default_rng(23)
    for _ in range(25):
        a, b = random_streamline(rng), random_streamline(rng)
        m = int(rng.choice([12, 20, 32]))
        assert d_mdf(a, b, m) == pytest.approx(naive_mdf(a.points, b.points, m), rel=1e-9)


def test_mdf_flip_invariance_and_self():
    rng = np.random.default_rng(24)
    for _ in range(20):
        a, b = random_streamline(rng), random_streamline(rng)
        assert d_mdf(a, a, 20) == pytest.approx(0.0, abs=1e-9)
        assert d_mdf(a, flip(a), 20) == pytest.approx(0.0, abs=1e-9)
        assert d_mdf(a, b, 20) == pytest.approx(d_mdf(flip(a), b, 20), abs=1e-9)
        assert d_mdf(a, b, 20) == pytest.approx(d_mdf(a, flip(b), 20), abs=1e-9)


def test_mdf_batch_matches_per_pair():
    rng = np.random.default_rng(25)
    pool = [random_streamline(rng) for _ in range(12)]
    m = 20
    stack = resample_stack(pool, m)
    ii = rng.integers(0, len(pool), 40)
    jj = rng.integers(0, len(pool), 40)
    batch = mdf_min_direct_flipped(stack[ii], stack[jj])
    for k in range(40):
        assert batch[k] == pytest.approx(d_mdf(pool[ii[k]], pool[jj[k]], m), rel=1e-9, abs=1e-12)


# ---------------------------------------------------------------------------
# PDM
# ---------------------------------------------------------------------------

def test_pdm_inner_double_sum():
    a = S([[0, 0, 0], [1, 0, 0]])
    expected = naive_pdm_inner(a.points, a.points, 1.0)
    assert expected == pytest.approx((1 + math.exp(-1)) / 2, rel=1e-12)
    assert pdm_inner(a, a, 1.0) == pytest.approx(expected, rel=1e-9)


def test_pdm_point_pair_closed_form():
    # Near-point streamlines one bandwidth apart: d^2 = 2(1 - e^-1).
    sigma = 42.0
    a = S([[0, 0, 0], [0, 0, 1e-9]])
    b = S([[sigma, 0, 0], [sigma, 0, 1e-9]])
    expected = math.sqrt(2 * (1 - math.exp(-1)))
    assert expected == pytest.approx(1.12438, abs=5e-6)
    assert d_pdm(a, b, sigma) == pytest.approx(expected, rel=1e-9)


def test_pdm_random_vs_oracle():
    rng = np.random.default_rng(26)
    for _ in range(20):
        a = random_streamline(rng, int(rng.integers(2, 10)))
        b = random_streamline(rng, int(rng.integers(2, 10)))
        assert d_pdm(a, b, 42.0) == pytest.approx(
            naive_pdm(a.points, b.points, 42.0), rel=1e-9, abs=1e-12)


def test_pdm_self_distance_zero():
    rng = np.random.default_rng(27)
    for _ in range(10):
        a = random_streamline(rng)
        assert d_pdm(a, a, 42.0) == 0.0


# ---------------------------------------------------------------------------
# Varifolds
# ---------------------------------------------------------------------------

def test_segments_direct_evaluation():
    segs = segments(S([[0, 0, 0], [1, 0, 0], [1, 1, 0]]))
    assert len(segs) == 2
    np.testing.assert_allclose([s.center for s in segs], [[0.5, 0, 0], [1, 0.5, 0]])
    np.testing.assert_allclose([s.tangent for s in segs], [[1, 0, 0], [0, 1, 0]])


def test_segment_count():
    rng = np.random.default_rng(28)
    s = random_streamline(rng, 17)
    assert len(segments(s)) == 16


def test_var_inner_parallel_segments_closed_form():
    # Two parallel unit segments at center distance h: kernel weight alone.
    sigma, h = 42.0, 5.0
    a = S([[0, 0, 0], [1, 0, 0]])
    b = S([[0, h, 0], [1, h, 0]])
    expected = math.exp(-h * h / sigma ** 2)
    assert varifolds_inner(a, b, sigma) == pytest.approx(expected, rel=1e-9)
    assert naive_var_inner(a.points, b.points, sigma) == pytest.approx(expected, rel=1e-12)


def test_var_parallel_segments_distance_closed_form():
    sigma, h = 42.0, 5.0
    a = S([[0, 0, 0], [1, 0, 0]])
    b = S([[0, h, 0], [1, h, 0]])
    expected = math.sqrt(2 - 2 * math.exp(-h * h / sigma ** 2))
    assert d_varifolds(a, b, sigma) == pytest.approx(expected, rel=1e-9)


def test_var_random_vs_oracle():
    rng = np.random.default_rng(29)
    for _ in range(15):
        a = random_streamline(rng, int(rng.integers(2, 10)))
        b = random_streamline(rng, int(rng.integers(2, 10)))
        assert varifolds_inner(a, b, 42.0) == pytest.approx(
            naive_var_inner(a.points, b.points, 42.0), rel=1e-9)
        assert d_varifolds(a, b, 42.0) == pytest.approx(
            naive_var(a.points, b.points, 42.0), rel=1e-9, abs=1e-12)


def test_var_orientation_invariance():
    rng = np.random.default_rng(30)
    for _ in range(15):
        a, b = random_streamline(rng), random_streamline(rng)
        assert d_varifolds(a, b, 42.0) == pytest.approx(
            d_varifolds(flip(a), b, 42.0), abs=1e-9)
        # Self-vs-flip sits under a square root of a cancelling difference,
        # so the achievable zero scales with sqrt of the inner product.
        scale = math.sqrt(varifolds_inner(a, a, 42.0))
        assert d_varifolds(a, flip(a), 42.0) <= 1e-6 * max(scale, 1.0)


# ---------------------------------------------------------------------------
# Dispatch and matrices
# ---------------------------------------------------------------------------

def test_dispatch_matches_direct_calls():
    rng = np.random.default_rng(31)
    a, b = random_streamline(rng), random_streamline(rng)
    assert distance(mdf(12), a, a) == 0.0
    assert distance(pdm(42.0), a, b) == d_pdm(a, b, 42.0)
    assert distance(varifolds(42.0), a, b) == d_varifolds(a, b, 42.0)
    assert distance(MC, a, b) == d_mc(a, b)


def test_all_kinds_finite_nonnegative_on_random_pairs():
    rng = np.random.default_rng(32)
    for _ in range(25):
        a, b = random_streamline(rng), random_streamline(rng)
        for kind in default_kinds():
            v = distance(kind, a, b)
            assert math.isfinite(v) and v >= 0.0


def test_distance_matrix_matches_per_pair_calls():
    rng = np.random.default_rng(33)
    streams = [random_streamline(rng) for _ in range(7)]
    for kind in default_kinds():
        m = distance_matrix(kind, streams)
        assert m.shape == (7, 7)
        for i in range(7):
            for j in range(7):
                assert m[i, j] == pytest.approx(
                    distance(kind, streams[i], streams[j]), rel=1e-9, abs=1e-9)
        np.testing.assert_array_equal(m, m.T)


def test_distance_matrix_rectangular_and_threaded():
    rng = np.random.default_rng(34)
    rows = [random_streamline(rng) for _ in range(5)]
    cols = [random_streamline(rng) for _ in range(3)]
    for kind in (MC, mdf(12), pdm(42.0), varifolds(42.0)):
        m = distance_matrix(kind, rows, cols)
        assert m.shape == (5, 3)
        m2 = distance_matrix(kind, rows, cols, threads=4)
        np.testing.assert_array_equal(m, m2)
        m3 = distance_matrix(kind, rows, threads=3)
        np.testing.assert_array_equal(m3, distance_matrix(kind, rows))


def test_rigid_motion_invariance_all_kinds():
    rng = np.random.default_rng(35)
    for _ in range(10):
        a, b = random_streamline(rng), random_streamline(rng)
        rot = random_rotation(rng)
        shift = rng.uniform(-100, 100, 3)
        a2, b2 = rigid_motion(a, rot, shift), rigid_motion(b, rot, shift)
        for kind in default_kinds():
            assert distance(kind, a, b) == pytest.approx(
                distance(kind, a2, b2), rel=1e-7, abs=1e-7)
