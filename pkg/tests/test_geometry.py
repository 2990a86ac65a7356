import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from touchline import (
    BoundingBox,
    Keypoint2D,
    Ray2D,
    ZeroVector,
    giou,
    iou,
    point_to_ray_distance,
    ray_box_intersects,
    ray_from_points,
)


def _random_box(rng, lo=0.0, hi=1000.0, min_side=5.0, max_side=400.0) -> BoundingBox:
    w = rng.uniform(min_side, max_side)
    h = rng.uniform(min_side, max_side)
    x = rng.uniform(lo, hi - w)
    y = rng.uniform(lo, hi - h)
    return BoundingBox(x, y, x + w, y + h)


_boxes = st.builds(
    lambda x, y, w, h: BoundingBox(x, y, x + w, y + h),
    st.floats(-500, 500),
    st.floats(-500, 500),
    st.floats(1, 400),
    st.floats(1, 400),
)


class TestIoU:
    def test_identical_boxes(self):
        box = BoundingBox(3.0, 4.0, 10.0, 12.0)
        assert iou(box, box) == 1.0

    def test_quarter_overlap_example(self):
        assert iou(BoundingBox(0, 0, 2, 2), BoundingBox(1, 1, 3, 3)) == pytest.approx(1 / 7)

    def test_disjoint_boxes(self):
        assert iou(BoundingBox(0, 0, 1, 1), BoundingBox(5, 5, 6, 6)) == 0.0

    @given(_boxes, _boxes)
    def test_symmetric_and_bounded(self, a, b):
        v = iou(a, b)
        assert v == iou(b, a)
        assert 0.0 <= v <= 1.0

    @given(_boxes, _boxes, st.floats(-300, 300), st.floats(-300, 300))
    def test_translation_invariant(self, a, b, tx, ty):
        shift = lambda box: BoundingBox(box.x_min + tx, box.y_min + ty, box.x_max + tx, box.y_max + ty)
        assert iou(shift(a), shift(b)) == pytest.approx(iou(a, b), abs=1e-9)

    def test_monte_carlo_agreement_small(self):
        # A quick MC sanity slice; the full 1000-pair run lives in the
        # acceptance suite.
        rng = np.random.default_rng(104)
        boxes_a = np.stack([_random_box(rng, min_side=60).as_array() for _ in range(50)])
        boxes_b = np.stack([_random_box(rng, min_side=60).as_array() for _ in range(50)])
        iou_mc, iou_se, giou_mc, giou_se = oracles.mc_box_overlap(boxes_a, boxes_b, 200_000, seed=104)
        for i in range(50):
            a = BoundingBox(*boxes_a[i])
            b = BoundingBox(*boxes_b[i])
            d_iou = abs(iou(a, b) - iou_mc[i])
            d_giou = abs(giou(a, b) - giou_mc[i])
            assert d_iou == 0.0 or d_iou < 3.6 * iou_se[i]
            assert d_giou == 0.0 or d_giou < 3.6 * giou_se[i]


class TestGIoU:
    def test_identical_boxes(self):
        box = BoundingBox(0.0, 0.0, 4.0, 4.0)
        assert giou(box, box) == 1.0

    def test_separated_unit_boxes(self):
        assert giou(BoundingBox(0, 0, 1, 1), BoundingBox(2, 0, 3, 1)) == pytest.approx(-1 / 3)

    @given(_boxes, _boxes)
    def test_never_exceeds_iou(self, a, b):
        assert giou(a, b) <= iou(a, b) + 1e-12
        assert giou(a, b) > -1.0

    def test_equals_iou_iff_hull_equals_union(self):
        rng = np.random.default_rng(9)
        for _ in range(2000):
            a = _random_box(rng)
            b = _random_box(rng)
            hull_area = (max(a.x_max, b.x_max) - min(a.x_min, b.x_min)) * (
                max(a.y_max, b.y_max) - min(a.y_min, b.y_min)
            )
            iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
            ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
            union = a.area() + b.area() - max(0.0, iw) * max(0.0, ih)
            if giou(a, b) == iou(a, b):
                assert hull_area == pytest.approx(union, rel=1e-12)
            if hull_area > union * (1 + 1e-9):
                assert giou(a, b) < iou(a, b)

    def test_matches_direct_area_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(1000):
            a = _random_box(rng)
            b = _random_box(rng)
            at, bt = tuple(a.as_array()), tuple(b.as_array())
            assert iou(a, b) == pytest.approx(oracles.iou_scalar(at, bt), abs=1e-12)
            assert giou(a, b) == pytest.approx(oracles.giou_scalar(at, bt), abs=1e-12)


class TestRayBox:
    def test_axis_aligned_hit(self):
        ray = ray_from_points(Keypoint2D(0, 0), Keypoint2D(1, 0))
        hit, t = ray_box_intersects(ray, BoundingBox(2, -1, 3, 1))
        assert hit and t == pytest.approx(2.0)

    def test_box_behind_origin_misses(self):
        ray = ray_from_points(Keypoint2D(0, 0), Keypoint2D(1, 0))
        hit, t = ray_box_intersects(ray, BoundingBox(-3, -1, -2, 1))
        assert not hit and t is None

    def test_origin_inside_box_hits_at_zero(self):
        rng = np.random.default_rng(19)
        for _ in range(200):
            box = _random_box(rng)
            ox = rng.uniform(box.x_min, box.x_max)
            oy = rng.uniform(box.y_min, box.y_max)
            angle = rng.uniform(0, 2 * math.pi)
            ray = Ray2D(Keypoint2D(ox, oy), np.array([math.cos(angle), math.sin(angle)]))
            hit, t = ray_box_intersects(ray, box)
            assert hit and t == 0.0

    def test_vertical_ray_parallel_slab(self):
        ray = Ray2D(Keypoint2D(5.0, 0.0), np.array([0.0, 1.0]))
        hit, t = ray_box_intersects(ray, BoundingBox(4.0, 10.0, 6.0, 12.0))
        assert hit and t == pytest.approx(10.0)
        miss, _ = ray_box_intersects(ray, BoundingBox(6.5, 10.0, 8.0, 12.0))
        assert not miss

    def test_matches_dense_sampling_oracle(self):
        rng = np.random.default_rng(23)
        t_max = 2000.0 * math.sqrt(2.0)
        step = t_max / 10_000
        checked = 0
        for _ in range(10_000):
            box = _random_box(rng, min_side=20.0)
            origin = (rng.uniform(0, 1000), rng.uniform(0, 1000))
            angle = rng.uniform(0, 2 * math.pi)
            direction = (math.cos(angle), math.sin(angle))
            sampled_hit, min_abs_sdf = oracles.ray_box_sampling(
                origin, direction, tuple(box.as_array()), t_max
            )
            if min_abs_sdf <= max(1e-3, step):
                continue  # boundary-fuzzy: below the oracle's resolution
            ray = Ray2D(Keypoint2D(*origin), np.array(direction))
            assert ray_box_intersects(ray, box)[0] == sampled_hit
            checked += 1
        assert checked > 7500  # exclusion must stay the exception


class TestPointToRayDistance:
    def test_perpendicular_drop(self):
        ray = ray_from_points(Keypoint2D(0, 0), Keypoint2D(1, 0))
        assert point_to_ray_distance(Keypoint2D(2, 3), ray) == pytest.approx(3.0)

    def test_behind_origin_clamps(self):
        ray = ray_from_points(Keypoint2D(0, 0), Keypoint2D(1, 0))
        assert point_to_ray_distance(Keypoint2D(-2, 0), ray) == pytest.approx(2.0)

    def test_zero_iff_on_ray(self):
        ray = ray_from_points(Keypoint2D(1, 1), Keypoint2D(2, 3))
        on_ray = Keypoint2D(1 + 3 * (2 - 1) / math.sqrt(5), 1 + 3 * (3 - 1) / math.sqrt(5))
        assert point_to_ray_distance(on_ray, ray) < 1e-9
        assert point_to_ray_distance(Keypoint2D(0.0, 5.0), ray) > 1e-3

    def test_matches_numerical_minimization(self):
        rng = np.random.default_rng(29)
        for _ in range(300):
            origin = rng.uniform(-100, 100, size=2)
            angle = rng.uniform(0, 2 * math.pi)
            direction = (math.cos(angle), math.sin(angle))
            p = rng.uniform(-300, 300, size=2)
            ray = Ray2D(Keypoint2D(*origin), np.array(direction))
            expect = oracles.point_ray_distance_minimize(tuple(p), tuple(origin), direction)
            assert point_to_ray_distance(Keypoint2D(*p), ray) == pytest.approx(expect, abs=1e-6)


def test_ray_requires_unit_direction():
    with pytest.raises(ZeroVector):
        Ray2D(Keypoint2D(0, 0), np.array([1.0, 1.0]))


def test_ray_from_coincident_points_rejected():
    with pytest.raises(ZeroVector):
        ray_from_points(Keypoint2D(1, 2), Keypoint2D(1, 2))
