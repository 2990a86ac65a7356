import math

import pytest

from touchline import (
    BoundingBox,
    Candidate,
    Config,
    ConfigError,
    Keypoint2D,
    SceneValidationError,
    Skeleton,
    scene_violations,
    validate_scene,
)
from touchline.simulate import SimSpec, generate


def test_validate_returns_scene_unchanged(scene_factory, collinear_skeleton):
    scene = scene_factory(collinear_skeleton)
    assert validate_scene(scene) is scene


def test_validate_is_idempotent(scene_factory, collinear_skeleton):
    scene = scene_factory(collinear_skeleton)
    once = validate_scene(scene)
    assert validate_scene(once) is once


def test_coincident_fingertip_mcp_is_degenerate(scene_factory, collinear_skeleton):
    skel = Skeleton(
        eye=collinear_skeleton.eye,
        shoulder=collinear_skeleton.shoulder,
        elbow=collinear_skeleton.elbow,
        wrist=collinear_skeleton.wrist,
        mcp=Keypoint2D(3.0, 0.0),
        fingertip=Keypoint2D(3.0, 0.0),
    )
    with pytest.raises(SceneValidationError) as excinfo:
        validate_scene(scene_factory(skel))
    violations = excinfo.value.violations
    assert any(
        v.kind == "DegenerateSkeleton" and "fingertip" in v.path and "mcp" in v.path
        for v in violations
    )


def test_zero_area_gt_box_is_empty(scene_factory, collinear_skeleton):
    scene = scene_factory(collinear_skeleton, gt_box=BoundingBox(10.0, 5.0, 10.0, 25.0))
    violations = scene_violations(scene)
    assert [v.kind for v in violations] == ["EmptyBox"]
    assert violations[0].path == "gt_box"


def test_out_of_frame_candidate_named_by_index(scene_factory, collinear_skeleton):
    scene = scene_factory(
        collinear_skeleton,
        candidates=(
            Candidate(BoundingBox(1.0, 1.0, 5.0, 5.0), 0.5),
            Candidate(BoundingBox(600.0, 400.0, 700.0, 470.0), 0.5),
        ),
    )
    violations = scene_violations(scene)
    assert [v.kind for v in violations] == ["OutOfFrame"]
    assert violations[0].path == "candidates[1].box"


def test_nan_keypoint_is_reported_with_path(scene_factory, collinear_skeleton):
    skel = Skeleton(
        eye=Keypoint2D(math.nan, 1.0),
        shoulder=collinear_skeleton.shoulder,
        elbow=collinear_skeleton.elbow,
        wrist=collinear_skeleton.wrist,
        mcp=collinear_skeleton.mcp,
        fingertip=collinear_skeleton.fingertip,
    )
    violations = scene_violations(scene_factory(skel))
    assert violations and violations[0].path == "skeleton.eye"


def test_every_violation_names_a_field_path(scene_factory):
    skel = Skeleton(*(Keypoint2D(1.0, 1.0) for _ in range(6)))
    scene = scene_factory(skel, gt_box=BoundingBox(5.0, 5.0, 5.0, 5.0))
    violations = scene_violations(scene)
    assert len(violations) >= 2
    assert all(v.path for v in violations)


def test_frame_tolerance_allows_tiny_excursions(scene_factory, collinear_skeleton):
    scene = scene_factory(collinear_skeleton, gt_box=BoundingBox(-5e-7, 0.0, 50.0, 50.0))
    assert scene_violations(scene) == []


def test_simulator_scenes_pass_validation():
    for labeled in generate(SimSpec(n_scenes=20, rng_seed=11)):
        assert validate_scene(labeled.scene) is labeled.scene


@pytest.mark.parametrize(
    "kwargs",
    [
        {"collinearity_threshold": 1.0},
        {"collinearity_threshold": -1.5},
        {"rerank_weight": 1.2},
        {"size_bucket_cutoffs": (0.05, 0.01)},
        {"size_bucket_cutoffs": (0.0, 0.05)},
        {"iou_thresholds": (0.5, 0.25)},
        {"iou_thresholds": (0.25, 1.5)},
        {"iou_thresholds": ()},
        {"rng_seed": -1},
        {"focal_alpha": 2.0},
        {"loss_weights": (1.0, 1.0)},
    ],
)
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(ConfigError):
        Config(**kwargs)


def test_config_defaults_match_protocol():
    cfg = Config()
    assert cfg.collinearity_threshold == 0.95
    assert cfg.iou_thresholds == (0.25, 0.5, 0.75)
    assert cfg.size_bucket_cutoffs == (0.01, 0.05)
    assert cfg.rerank_weight == 0.5
