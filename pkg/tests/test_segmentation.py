import numpy as np
import pytest

from chronosem import (
    PermTestConfig,
    build_vocabulary,
    fit_ca,
    perm_test,
    project_supplementary_row,
    segment,
    segment_centroids_as_supplementary,
    threshold_matrix,
)
from chronosem.errors import DimensionMismatch
from chronosem.segmentation import SegmentationResult, _test_from_distances
from helpers import docs_from_rows, synthetic_corpus_rows, three_blob_points
from oracles import exhaustive_perm_p, weighted_mean_coords


def far_groups(n_a=3, n_b=3, gap=100.0, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n_a, 2)) * 0.1
    b = rng.standard_normal((n_b, 2)) * 0.1 + gap
    return a, b


class TestPermTest:
    def test_identical_populations_fuse(self):
        # interleave one cluster's points between the two groups, union of 6
        rng = np.random.default_rng(1)
        pts = rng.standard_normal((6, 2))
        a, b = pts[::2], pts[1::2]
        res = perm_test(a, b, PermTestConfig(rng_seed=7))
        union = np.vstack([a, b])
        from scipy.spatial.distance import pdist, squareform

        h_ex, p_ex = exhaustive_perm_p(squareform(pdist(union)), len(a))
        assert res.h == h_ex
        assert res.p > 0.15 and p_ex > 0.15
        assert res.decision == "fuse"

    def test_separated_groups_block(self):
        a, b = far_groups(3, 3)
        res = perm_test(a, b, PermTestConfig(rng_seed=7))
        # every 1-coded distance crosses the gap: h is maximal
        assert res.h == 7  # 15 pairs, 7 strictly above the median, all inter
        assert res.p <= 0.15
        assert res.decision == "block"

    def test_two_plus_two_cannot_block_at_default_alpha(self):
        # with |A|=|B|=2 the exhaustive p floor is 2/6: the identity and its
        # complement always match h, so even a huge gap fuses at alpha=0.15
        a = np.array([[0.0], [0.1]])
        b = np.array([[100.0], [100.1]])
        res = perm_test(a, b, PermTestConfig(rng_seed=7))
        assert res.h == 3  # 6 pairwise distances, top half all inter-group
        assert res.p == pytest.approx(1.0 / 3.0, abs=0.02)
        assert res.decision == "fuse"

    def test_alpha_zero_always_fuses(self):
        a, b = far_groups(4, 4)
        res = perm_test(a, b, PermTestConfig(alpha=0.0, rng_seed=3))
        assert res.p > 0.0  # identity relabelling is part of the set
        assert res.decision == "fuse"

    def test_degenerate_union_auto_fuses(self):
        res = perm_test([[0.0]], [[99.0]], PermTestConfig(rng_seed=0))
        assert res.degenerate and res.decision == "fuse" and res.p == 1.0

    def test_monte_carlo_tracks_exhaustive(self):
        from scipy.spatial.distance import pdist, squareform

        rng = np.random.default_rng(9)
        for n_a, n_b in [(2, 2), (2, 3), (3, 3), (4, 3), (4, 4), (5, 4), (5, 5), (6, 6)]:
            pts = rng.standard_normal((n_a + n_b, 3))
            a, b = pts[:n_a], pts[n_a:]
            res = perm_test(a, b, PermTestConfig(n_permutations=5000, rng_seed=11))
            h_ex, p_ex = exhaustive_perm_p(squareform(pdist(pts)), n_a)
            assert res.h == h_ex
            assert abs(res.p - p_ex) <= 0.02

    def test_h_invariant_under_monotone_distance_transform(self):
        from scipy.spatial.distance import pdist, squareform

        rng = np.random.default_rng(4)
        d = squareform(pdist(rng.standard_normal((7, 2))))
        cfg = PermTestConfig(rng_seed=5)
        seed = np.random.SeedSequence(cfg.rng_seed)
        base = _test_from_distances(d, 3, cfg, seed)
        for transform in (lambda x: x**2, lambda x: np.sqrt(x), lambda x: 3 + 2 * x):
            seed = np.random.SeedSequence(cfg.rng_seed)
            res = _test_from_distances(transform(d), 3, cfg, seed)
            assert res.h == base.h and res.p == base.p

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            perm_test(np.ones((2, 2)), np.ones((2, 3)))


class TestSegment:
    def test_three_blobs_recovered(self):
        pts = three_blob_points()
        res = segment(pts, PermTestConfig(alpha=0.15, rng_seed=0))
        assert [(seg[0], seg[-1]) for seg in res.segments] == [(0, 4), (5, 9), (10, 14)]

    def test_identical_points_single_segment(self):
        pts = np.ones((8, 3))
        res = segment(pts, PermTestConfig(rng_seed=0))
        assert res.n_segments == 1
        assert res.segments[0] == list(range(8))

    def test_alpha_resolution_sweep(self):
        pts = three_blob_points()
        counts = [
            segment(pts, PermTestConfig(alpha=a, n_permutations=2000, rng_seed=0)).n_segments
            for a in (0.0, 0.001, 0.05, 0.15, 0.8)
        ]
        assert counts[0] == 1  # alpha 0: every merge authorized
        assert counts == sorted(counts)  # finer alpha, coarser partition
        assert counts[-1] > 3

    def test_bit_reproducible_with_fixed_seed(self):
        pts = three_blob_points()
        cfg = PermTestConfig(alpha=0.15, n_permutations=1000, rng_seed=99)
        r1 = segment(pts, cfg)
        r2 = segment(pts, cfg)
        assert r1.segments == r2.segments
        assert [(t.h, t.p, t.decision) for t in r1.tests] == [
            (t.h, t.p, t.decision) for t in r2.tests
        ]

    def test_segments_partition_sequence(self):
        rng = np.random.default_rng(17)
        pts = rng.standard_normal((20, 3))
        ids = list(range(1, 21))
        res = segment(pts, PermTestConfig(alpha=0.5, n_permutations=500, rng_seed=1), ids=ids)
        flattened = [i for seg in res.segments for i in seg]
        assert flattened == ids
        for t in res.blocked:
            assert t.p <= 0.5
        for t in res.tests:
            if t.decision == "fuse":
                assert t.p > 0.5

    def test_blocked_records_match_boundaries(self):
        pts = three_blob_points()
        res = segment(pts, PermTestConfig(alpha=0.15, rng_seed=0))
        assert {b.boundary_after for b in res.blocked} == {4, 9}
        for b in res.blocked:
            assert b.p <= 0.15


class TestSegmentCentroids:
    def _corpus_model(self):
        rows = synthetic_corpus_rows()
        docs = docs_from_rows(rows)
        tdm = threshold_matrix(docs, build_vocabulary(docs), 5, 5)
        counts = np.asarray(tdm.principal_counts().todense())
        _, model = fit_ca(counts)
        return counts, model

    def test_segment_aggregate_projects_to_weighted_member_mean(self):
        counts, model = self._corpus_model()
        res = segment(
            model.row_coords, PermTestConfig(n_permutations=500, rng_seed=2),
        )
        offset = 0
        for seg in res.segments:
            members = list(range(offset, offset + len(seg)))
            offset += len(seg)
            agg = counts[members].sum(axis=0)
            proj = project_supplementary_row(model, agg)
            oracle = weighted_mean_coords(model.row_coords, model.row_masses, members)
            assert np.allclose(proj, oracle, atol=1e-9)

    def test_forty_segments_four_singletons_layout(self):
        rng = np.random.default_rng(3)
        sizes = [2] * 40
        for k in (5, 17, 35, 38):  # 6th, 18th, 36th, 39th segments
            sizes[k] = 1
        n_docs = sum(sizes)
        counts = rng.integers(0, 3, size=(n_docs, 30))
        counts[:, 0] += 1  # no empty rows
        segments, start = [], 0
        for s in sizes:
            segments.append(list(range(start, start + s)))
            start += s
        res = SegmentationResult(segments=segments, blocked=[], tests=[])
        fmap = segment_centroids_as_supplementary(res, counts)
        assert int((~fmap.supplementary).sum()) == 36
        assert int(fmap.supplementary.sum()) == 4
        assert fmap.model.row_coords.shape[0] == 36
        assert np.all(np.isfinite(fmap.coords[fmap.supplementary]))
        assert res.singleton_segments == [segments[k][0] for k in (5, 17, 35, 38)]

    def test_single_segment_centroid_is_origin(self):
        rng = np.random.default_rng(4)
        counts = rng.integers(1, 4, size=(6, 8))
        res = SegmentationResult(segments=[list(range(6))], blocked=[], tests=[])
        fmap = segment_centroids_as_supplementary(res, counts)
        assert fmap.coords.shape[0] == 1
        assert float(np.linalg.norm(fmap.coords)) == 0.0

    def test_principal_policy_keeps_singletons_active(self):
        rng = np.random.default_rng(5)
        counts = rng.integers(0, 3, size=(5, 10)) + 1
        res = SegmentationResult(
            segments=[[0, 1], [2], [3, 4]], blocked=[], tests=[]
        )
        fmap = segment_centroids_as_supplementary(res, counts, "principal")
        assert not fmap.supplementary.any()
        assert fmap.model.row_coords.shape[0] == 3
