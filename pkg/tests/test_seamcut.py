import numpy as np
import pytest

from seamtake import geometry, video
from seamtake.errors import ConstraintConflictError
from seamtake.seamcut import (
    LABEL_A,
    LABEL_B,
    SeamParams,
    StrokeSet,
    apply_keyframes,
    build_graph,
    coarse_to_fine_cut,
    grow_band,
    identity_motion,
    labeling_energy,
    min_cut,
    upsample_labels,
)

from conftest import brute_force_min_energy


def clip_pair_from_difference(d):
    """Clips whose difference volume is exactly d (a=0, b=sqrt(d) per px on
    one channel)."""
    t, h, w = d.shape
    a = np.zeros((t, h, w, 3), dtype=np.float32)
    b = np.zeros((t, h, w, 3), dtype=np.float32)
    b[..., 0] = np.sqrt(d)
    return video.VideoClip(a), video.VideoClip(b), np.ones((t, h, w), dtype=bool)


class TestBuildGraph:
    def test_2x2x1_structure(self):
        d = np.zeros((1, 2, 2))
        g = build_graph(d, StrokeSet(), SeamParams(), identity_motion(1))
        assert g.num_nodes == 4
        assert g.num_spatial_edges == 4
        assert g.num_temporal_edges == 0

    def test_1x1x2_temporal_edge_weight(self):
        d = np.array([[[3.0]], [[5.0]]])
        lam = 2.0
        strokes = StrokeSet.from_points([(0, 0, 0, "A"), (1, 0, 0, "B")])
        g = build_graph(d, strokes, SeamParams(lam=lam), identity_motion(2))
        assert g.num_temporal_edges == 1
        labels, energy = min_cut(g)
        assert labels[0, 0, 0] == LABEL_A and labels[1, 0, 0] == LABEL_B
        assert energy == pytest.approx(lam * (3.0 + 5.0) / 2.0)

    def test_motion_translation_drops_out_of_bounds(self):
        d = np.zeros((2, 1, 3))
        motion = np.stack([geometry.translation(1, 0)])
        g = build_graph(d, StrokeSet(), SeamParams(), motion)
        # (0,0,0)->(1,0,1) and (1,0,0)->(2,0,1); (2,0,0) maps outside
        assert g.num_temporal_edges == 2

    def test_both_labels_on_one_pixel(self):
        d = np.zeros((1, 2, 2))
        strokes = StrokeSet.from_points([(0, 1, 1, "A"), (0, 1, 1, "B")])
        with pytest.raises(ConstraintConflictError):
            build_graph(d, strokes, SeamParams(), identity_motion(1))


class TestMinCut:
    def test_zero_volume_zero_energy(self):
        d = np.zeros((1, 3, 3))
        strokes = StrokeSet.from_points([(0, 0, 0, "A"), (0, 2, 2, "B")])
        g = build_graph(d, strokes, SeamParams(), identity_motion(1))
        labels, energy = min_cut(g)
        assert energy == 0.0
        assert labels[0, 0, 0] == LABEL_A and labels[0, 2, 2] == LABEL_B

    def test_chain_cut_position(self):
        # 4x1x1 volume D=[0,9,1,0]: cheapest boundary between pixels 2 and 3
        d = np.array([0.0, 9.0, 1.0, 0.0]).reshape(1, 1, 4)
        strokes = StrokeSet.from_points([(0, 0, 0, "A"), (0, 3, 0, "B")])
        g = build_graph(d, strokes, SeamParams(), identity_motion(1))
        labels, energy = min_cut(g)
        assert energy == pytest.approx(0.5)
        assert labels[0, 0, :3].tolist() == [LABEL_A] * 3 and labels[0, 0, 3] == LABEL_B
        # oracle: enumerate the three cut positions
        weights = [(0 + 9) / 2, (9 + 1) / 2, (1 + 0) / 2]
        assert energy == min(weights)

    def test_random_volumes_match_enumeration(self, rng):
        for trial in range(20):
            t_n = int(rng.integers(1, 4))
            h = int(rng.integers(1, 4))
            w = int(rng.integers(2, 4))
            d = rng.integers(0, 101, size=(t_n, h, w)).astype(np.float64)
            total = t_n * h * w
            n_const = max(2, total - 14)
            flat = rng.choice(total, size=n_const, replace=False)
            const_a = np.zeros((t_n, h, w), bool)
            const_b = np.zeros((t_n, h, w), bool)
            for i, f in enumerate(flat):
                (const_a if i % 2 == 0 else const_b).flat[f] = True
            lam = float(rng.choice([0.1, 1.0, 3.0]))
            motion = identity_motion(t_n)
            g = build_graph(d, (const_a, const_b), SeamParams(lam=lam), motion)
            labels, _ = min_cut(g)
            got = labeling_energy(labels, d, lam, motion)
            want = brute_force_min_energy(d, lam, motion, const_a, const_b)
            assert got == pytest.approx(want, abs=1e-9), trial
            assert np.all(labels[const_a] == LABEL_A) and np.all(labels[const_b] == LABEL_B)

    def test_motion_compensated_matches_enumeration(self, rng):
        d = rng.integers(0, 101, size=(2, 3, 4)).astype(np.float64)
        motion = np.stack([geometry.translation(1, 0)])
        const_a = np.zeros((2, 3, 4), bool)
        const_b = np.zeros((2, 3, 4), bool)
        const_a[0, 0, 0] = True
        const_b[1, 2, 3] = True
        g = build_graph(d, (const_a, const_b), SeamParams(lam=1.5), motion)
        labels, _ = min_cut(g)
        got = labeling_energy(labels, d, 1.5, motion)
        want = brute_force_min_energy(d, 1.5, motion, const_a, const_b)
        assert got == pytest.approx(want, abs=1e-9)

    def test_identity_motion_is_plain_grid(self):
        d = np.zeros((3, 4, 5))
        g = build_graph(d, StrokeSet(), SeamParams(), identity_motion(3))
        assert g.num_temporal_edges == 4 * 5 * 2
        assert g.num_spatial_edges == 3 * (4 * 4 + 3 * 5)


class TestLambdaBehavior:
    def _moving_corridor(self):
        # high-cost volume with a zero-cost moving column the seam can ride
        t_n, h, w = 5, 5, 21
        d = np.full((t_n, h, w), 100.0)
        corridor = [3, 5, 7, 5, 3]
        for t, x in enumerate(corridor):
            d[t, :, x] = 0.0
        strokes = StrokeSet.from_points(
            [(t, 0, y, "A") for t in range(t_n) for y in range(h)]
            + [(t, w - 1, y, "B") for t in range(t_n) for y in range(h)]
        )
        return d, strokes, corridor

    def _seam_positions(self, labels):
        pos = []
        for t in range(labels.shape[0]):
            xs = np.argwhere(labels[t, 0, :-1] != labels[t, 0, 1:])
            pos.append(float(xs.mean()) if xs.size else -1.0)
        return pos

    def test_low_lambda_moves_high_lambda_freezes(self):
        d, strokes, corridor = self._moving_corridor()
        lo = build_graph(d, strokes, SeamParams(lam=0.1), identity_motion(5))
        labels_lo, _ = min_cut(lo)
        hi = build_graph(d, strokes, SeamParams(lam=50.0), identity_motion(5))
        labels_hi, _ = min_cut(hi)
        pos_lo = self._seam_positions(labels_lo)
        pos_hi = self._seam_positions(labels_hi)
        assert np.var(pos_lo) > 0.5          # follows the corridor
        assert np.var(pos_hi) == 0.0         # frame-constant
        assert min(pos_lo) >= 0 and min(pos_hi) >= 0


class TestGrowBand:
    def test_uniform_labels_empty_band(self):
        labels = np.zeros((2, 4, 4), np.uint8)
        band = grow_band(labels, 1, identity_motion(2))
        assert not band.any()

    def test_vertical_seam_dilation(self):
        labels = np.zeros((1, 10, 10), np.uint8)
        labels[:, :, 5:] = LABEL_B
        band = grow_band(labels, 1, identity_motion(1))
        cols = np.flatnonzero(band[0].any(axis=0))
        assert cols.tolist() == [3, 4, 5, 6, 7]

    def test_grow_zero_minimal(self):
        labels = np.zeros((1, 10, 10), np.uint8)
        labels[:, :, 5:] = LABEL_B
        band = grow_band(labels, 0, identity_motion(1))
        cols = np.flatnonzero(band[0].any(axis=0))
        assert cols.tolist() == [4, 5, 6]


class TestUpsampleLabels:
    def test_single_voxel(self):
        labels = np.full((1, 1, 1), LABEL_A, np.uint8)
        up = upsample_labels(labels, (2, 2, 2))
        assert up.shape == (2, 2, 2) and np.all(up == LABEL_A)

    def test_replication(self):
        labels = np.array([[[LABEL_A, LABEL_B]]], np.uint8)
        up = upsample_labels(labels, (2, 1, 4))
        for t in range(2):
            assert up[t, 0].tolist() == [LABEL_A, LABEL_A, LABEL_B, LABEL_B]

    def test_odd_dimension_maps_to_last(self):
        labels = np.array([[[0, 1, 0]]], np.uint8)
        up = upsample_labels(labels, (1, 1, 5))
        assert up[0, 0].tolist() == [0, 0, 1, 1, 0]


class TestCoarseToFine:
    def _random_case(self, rng, t_n=4, h=16, w=16):
        d = rng.uniform(0, 100, size=(t_n, h, w))
        d[:, :, : w // 3] *= 0.1
        a, b, masks = clip_pair_from_difference(d)
        strokes = StrokeSet.from_points(
            [(t, 1, 1, "A") for t in range(t_n)] + [(t, w - 2, h - 2, "B") for t in range(t_n)]
        )
        return a, b, masks, strokes, d

    def test_level_zero_equals_single_scale(self, rng):
        a, b, masks, strokes, d = self._random_case(rng)
        labels0, _ = coarse_to_fine_cut(a, b, masks, strokes, SeamParams(level=0), identity_motion(4))
        g = build_graph(d, strokes, SeamParams(level=0), identity_motion(4))
        labels_direct, _ = min_cut(g)
        assert np.array_equal(labels0, labels_direct)

    def test_energy_bounded_below_by_single_scale(self, rng):
        for _ in range(3):
            a, b, masks, strokes, d = self._random_case(rng)
            labels_cf, stats = coarse_to_fine_cut(
                a, b, masks, strokes, SeamParams(level=1, grow=1), identity_motion(4)
            )
            labels_ss, _ = coarse_to_fine_cut(
                a, b, masks, strokes, SeamParams(level=0), identity_motion(4)
            )
            e_cf = labeling_energy(labels_cf, d, 1.0, identity_motion(4))
            e_ss = labeling_energy(labels_ss, d, 1.0, identity_motion(4))
            assert e_cf >= e_ss - 1e-9
            assert e_cf <= 2.5 * e_ss + 1e-9
            # strokes still separated
            assert np.all(labels_cf[:, 1, 1] == LABEL_A)
            assert np.all(labels_cf[:, 14, 14] == LABEL_B)

    def test_labels_outside_band_inherit_coarse(self, rng):
        # one manual pyramid step: composition of the suite of ops
        a, b, masks, strokes, d = self._random_case(rng, t_n=2, h=12, w=12)
        from seamtake.seamcut import _downsample_level

        count_a, count_b = strokes.counts(d.shape)
        a2, b2, m2, motion2, counts2 = _downsample_level(
            a, b, masks, identity_motion(2), (count_a, count_b)
        )
        d2 = video.difference_volume(a2, b2, m2)
        g = build_graph(d2, (counts2[0] > counts2[1], counts2[1] > counts2[0]),
                        SeamParams(), motion2)
        coarse, _ = min_cut(g)
        up = upsample_labels(coarse, d.shape)
        band = grow_band(up, 1, identity_motion(2))
        g_fine = build_graph(d, (count_a > 0, count_b > 0), SeamParams(), identity_motion(2),
                             band=band, boundary_labels=up)
        fine, _ = min_cut(g_fine)
        assert np.array_equal(fine[~band], up[~band])

    def test_trivial_without_both_labels(self):
        a, b, masks, _, _ = self._random_case(np.random.default_rng(0))
        strokes = StrokeSet.from_points([(0, 1, 1, "A")])
        with pytest.warns(UserWarning, match="both labels"):
            labels, _ = coarse_to_fine_cut(a, b, masks, strokes, SeamParams(), identity_motion(4))
        assert np.all(labels == LABEL_A)

    def test_zero_difference_zero_energy_any_params(self, rng):
        d = np.zeros((3, 12, 12))
        a, b, masks = clip_pair_from_difference(d)
        strokes = StrokeSet.from_points([(0, 0, 0, "A"), (2, 11, 11, "B")])
        for level, grow, lam in [(0, 1, 1.0), (1, 0, 0.3), (2, 2, 5.0)]:
            labels, stats = coarse_to_fine_cut(
                a, b, masks, strokes, SeamParams(lam=lam, level=level, grow=grow),
                identity_motion(3),
            )
            assert labeling_energy(labels, d, lam, identity_motion(3)) == 0.0

    def test_auto_level_reduction_warns(self, rng):
        a, b, masks, strokes, _ = self._random_case(rng, t_n=2, h=16, w=16)
        with pytest.warns(UserWarning, match="pyramid reduced"):
            coarse_to_fine_cut(a, b, masks, strokes, SeamParams(level=4), identity_motion(2))

    def test_stroke_constraints_hold_at_full_resolution(self, rng):
        a, b, masks, strokes, _ = self._random_case(rng)
        labels, _ = coarse_to_fine_cut(
            a, b, masks, strokes, SeamParams(level=1, grow=0), identity_motion(4)
        )
        for (t, x, y, code) in strokes.entries:
            assert labels[t, y, x] == code


class TestKeyframes:
    def test_keyframe_dominates(self, rng):
        d = rng.uniform(0, 50, size=(3, 6, 6))
        a, b, masks = clip_pair_from_difference(d)
        strokes = StrokeSet.from_points([(0, 0, 0, "A"), (2, 5, 5, "B")])
        kf = {1: np.full((6, 6), LABEL_A, np.uint8)}
        labels, _ = coarse_to_fine_cut(
            a, b, masks, strokes, SeamParams(level=0), identity_motion(3), keyframes=kf
        )
        assert np.all(labels[1] == LABEL_A)

    def test_no_keyframes_unchanged(self, rng):
        d = rng.uniform(0, 50, size=(2, 6, 6))
        a, b, masks = clip_pair_from_difference(d)
        strokes = StrokeSet.from_points([(0, 0, 0, "A"), (1, 5, 5, "B")])
        l1, _ = coarse_to_fine_cut(a, b, masks, strokes, SeamParams(level=0), identity_motion(2))
        l2, _ = coarse_to_fine_cut(
            a, b, masks, strokes, SeamParams(level=0), identity_motion(2), keyframes={}
        )
        assert np.array_equal(l1, l2)

    def test_keyframes_decouple_intervals(self, rng):
        # with a fully labeled middle frame, the cut left of it must not
        # depend on the volume right of it
        t_n, h, w = 5, 4, 8
        d1 = rng.uniform(0, 100, size=(t_n, h, w))
        d2 = d1.copy()
        d2[3:] = rng.uniform(0, 100, size=(2, h, w))  # change only t >= 3
        kf_label = np.zeros((h, w), np.uint8)
        kf_label[:, : w // 2] = LABEL_A
        kf_label[:, w // 2 :] = LABEL_B
        strokes = StrokeSet.from_points(
            [(t, 0, 0, "A") for t in range(t_n)] + [(t, w - 1, h - 1, "B") for t in range(t_n)]
        )
        out = []
        for d in (d1, d2):
            a, b, masks = clip_pair_from_difference(d)
            labels, _ = coarse_to_fine_cut(
                a, b, masks, strokes, SeamParams(level=0), identity_motion(t_n),
                keyframes={2: kf_label},
            )
            out.append(labels)
        assert np.array_equal(out[0][:3], out[1][:3])

    def test_keyframe_stroke_conflict(self, rng):
        d = rng.uniform(0, 50, size=(2, 4, 4))
        a, b, masks = clip_pair_from_difference(d)
        strokes = StrokeSet.from_points([(0, 0, 0, "A"), (1, 3, 3, "B")])
        kf = {0: np.full((4, 4), LABEL_B, np.uint8)}
        with pytest.raises(ConstraintConflictError):
            coarse_to_fine_cut(
                a, b, masks, strokes, SeamParams(level=0), identity_motion(2), keyframes=kf
            )

    def test_apply_keyframes_on_graph(self):
        d = np.zeros((2, 3, 3))
        strokes = StrokeSet.from_points([(0, 0, 0, "A"), (1, 2, 2, "B")])
        g = build_graph(d, strokes, SeamParams(), identity_motion(2))
        apply_keyframes(g, {0: np.full((3, 3), LABEL_A, np.uint8)})
        labels, _ = min_cut(g)
        assert np.all(labels[0] == LABEL_A)
