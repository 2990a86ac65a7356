import hypothesis
import pytest

from touchline import BoundingBox, Candidate, Config, Keypoint2D, Scene, Skeleton

hypothesis.settings.register_profile(
    "touchline", max_examples=60, deadline=None, derandomize=True
)
hypothesis.settings.load_profile("touchline")


@pytest.fixture
def config() -> Config:
    return Config()


@pytest.fixture
def collinear_skeleton() -> Skeleton:
    """Fully extended arm along +x; all pairwise similarities are 1."""
    return Skeleton(
        eye=Keypoint2D(0.0, -1.0),
        shoulder=Keypoint2D(0.0, 0.0),
        elbow=Keypoint2D(1.0, 0.0),
        wrist=Keypoint2D(2.0, 0.0),
        mcp=Keypoint2D(2.2, 0.0),
        fingertip=Keypoint2D(3.0, 0.0),
    )


@pytest.fixture
def right_angle_skeleton() -> Skeleton:
    """Arm bent 90 degrees at the elbow; IF parallel to UA."""
    return Skeleton(
        eye=Keypoint2D(0.0, -1.0),
        shoulder=Keypoint2D(0.0, 0.0),
        elbow=Keypoint2D(1.0, 0.0),
        wrist=Keypoint2D(1.0, 1.0),
        mcp=Keypoint2D(1.0, 1.2),
        fingertip=Keypoint2D(2.0, 1.2),
    )


def make_scene(
    skeleton: Skeleton,
    gt_box: BoundingBox = BoundingBox(100.0, 100.0, 120.0, 120.0),
    candidates: tuple[Candidate, ...] = (),
    scene_id: str = "scene-test",
    size: tuple[float, float] = (640.0, 480.0),
    **kwargs,
) -> Scene:
    return Scene(
        id=scene_id,
        image_width=size[0],
        image_height=size[1],
        skeleton=skeleton,
        gt_box=gt_box,
        candidates=candidates,
        text="the red mug",
        **kwargs,
    )


@pytest.fixture
def scene_factory():
    return make_scene
