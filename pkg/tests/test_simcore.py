"""Episode lifecycle: start sampling, stepping, noise, success, flooding."""

import math

import numpy as np
import pytest

from aeronav.errors import SessionDone
from aeronav.geodesy import Action, Pose
from aeronav.simcore import (
    FloodSpec,
    NoiseSpec,
    SessionState,
    apply_flood,
    is_success,
    median_terrain_height,
    observe_cheap,
    sample_start,
    step,
)
from aeronav.worldmodel import Category, SceneObject
from conftest import make_flat_scene, raise_block


def _session(pose=Pose(300, 300, 120, -45, 0), rng=None):
    return SessionState.begin(pose, rng=rng)


# -- start sampling --------------------------------------------------------


def test_start_bounds_property():
    scene = make_flat_scene(extent=1200.0)
    goal = (600.0, 600.0, 2.0)
    rng = np.random.default_rng(1)
    for _ in range(10000):
        p = sample_start(scene, goal, rng)
        d = math.hypot(p.x - goal[0], p.y - goal[1])
        assert 50.0 <= d <= 500.0
        assert 100.0 <= p.z <= 150.0
        assert p.yaw % 30.0 == 0.0


def test_start_deterministic():
    scene = make_flat_scene(extent=1200.0)
    goal = (600.0, 600.0, 2.0)
    a = sample_start(scene, goal, np.random.default_rng(42))
    b = sample_start(scene, goal, np.random.default_rng(42))
    assert a == b


# -- stepping --------------------------------------------------------------


def test_noise_disabled_observed_equals_true():
    scene = make_flat_scene()
    s = _session()
    s, _ = step(s, scene, Action.MOVE_FORWARD)
    assert s.observed_pose == s.pose


def test_stop_sets_done():
    scene = make_flat_scene()
    s = _session()
    s, _ = step(s, scene, Action.STOP)
    assert s.done and not s.truncated
    assert s.pose == s.visited[0]
    with pytest.raises(SessionDone):
        step(s, scene, Action.MOVE_FORWARD)


def test_step_limit_truncates():
    scene = make_flat_scene()
    s = _session()
    for _ in range(3):
        s, _ = step(s, scene, Action.TURN_LEFT, max_steps=3)
    assert s.done and s.truncated


def test_forward_into_wall_is_flagged_noop():
    scene = make_flat_scene()
    raise_block(scene, 310, 280, 340, 320, 140.0)
    s = _session(Pose(305, 300, 100, -45, 0))
    s, _ = step(s, scene, Action.MOVE_FORWARD)
    assert s.pose == s.visited[0]
    assert s.collisions == [0]
    assert s.step_count == 1


def test_forward_out_of_extent_is_flagged_noop():
    scene = make_flat_scene()
    s = _session(Pose(598, 300, 100, -45, 0))
    s, _ = step(s, scene, Action.MOVE_FORWARD)
    assert s.pose == s.visited[0]
    assert s.collisions == [0]


def test_descend_clamped_to_clearance():
    scene = make_flat_scene(ground=10.0)
    s = _session(Pose(300, 300, 16.0, -45, 0))
    s, _ = step(s, scene, Action.DESCEND)
    assert s.pose.z == 15.0  # terrain 10 + 5 m clearance
    s, _ = step(s, scene, Action.DESCEND)
    assert s.pose.z == 15.0


def test_visited_tracks_steps():
    scene = make_flat_scene()
    s = _session()
    for a in (Action.MOVE_FORWARD, Action.TURN_LEFT, Action.ASCEND):
        s, _ = step(s, scene, a)
    assert len(s.visited) == s.step_count + 1 == 4


def test_noise_perturbs_observed_only():
    scene = make_flat_scene()
    noise = NoiseSpec(enabled=True, sigma=50.0, clip=100.0)
    s = _session(rng=np.random.default_rng(5))
    s, _ = step(s, scene, Action.MOVE_FORWARD, noise=noise)
    assert s.pose == Pose(305, 300, 120, -45, 0)
    assert (s.observed_pose.x, s.observed_pose.y) != (s.pose.x, s.pose.y)
    assert s.observed_pose.z == s.pose.z


def _clipped_normal_std(sigma: float, clip: float) -> float:
    # closed-form second moment of a normal censored at +-clip
    a = clip / sigma
    phi = math.exp(-a * a / 2.0) / math.sqrt(2.0 * math.pi)
    inner = math.erf(a / math.sqrt(2.0)) - 2.0 * a * phi
    tail = 1.0 - math.erf(a / math.sqrt(2.0))
    return math.sqrt(sigma * sigma * inner + clip * clip * tail)


def test_noise_clip_and_std():
    scene = make_flat_scene(extent=600.0)
    noise = NoiseSpec(enabled=True, sigma=50.0, clip=100.0)
    s = _session(rng=np.random.default_rng(7))
    deltas = []
    for _ in range(10000):
        s, _ = step(s, scene, Action.TURN_LEFT, noise=noise, max_steps=10**9)
        deltas.append(s.observed_pose.x - s.pose.x)
        deltas.append(s.observed_pose.y - s.pose.y)
    deltas = np.array(deltas)
    assert np.all(np.abs(deltas) <= 100.0)
    predicted = _clipped_normal_std(50.0, 100.0)
    assert abs(deltas.std() - predicted) / predicted < 0.1


def test_noise_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec(enabled=True, sigma=50.0, clip=10.0)
    with pytest.raises(ValueError):
        FloodSpec(water_level=200.0)


# -- success ---------------------------------------------------------------


def test_success_boundary():
    goal = (0.0, 0.0, 0.0)
    assert is_success((0.0, 0.0, 0.0), goal)
    assert is_success((20.0, 0.0, 0.0), goal)
    assert not is_success((20.1, 0.0, 0.0), goal)


# -- cheap observation -----------------------------------------------------


def test_observe_cheap_sees_object_below(flat_scene):
    obs = observe_cheap(flat_scene, Pose(300, 340, 120, -90, 0))
    ids = [oid for oid, _ in obs.visible_objects]
    assert "obj-car" in ids
    for _, (u0, v0, u1, v1) in obs.visible_objects:
        assert u0 <= u1 and v0 <= v1


def test_observe_cheap_misses_far_object(flat_scene):
    # fov square at z=50 has side 100; the car at (300, 340) is outside
    obs = observe_cheap(flat_scene, Pose(100, 100, 50, -90, 0))
    assert obs.visible_objects == []


# -- flood -----------------------------------------------------------------


def _two_level_scene():
    """West half at 0 m, east half at 12 m, objects on both."""
    s = make_flat_scene()
    raise_block(s, 300, 0, 600, 600, 12.0)
    low = SceneObject("low-car", Category.CAR, ["red", "car"],
                      (100.0, 100.0, 1.5), (98.0, 98.0, 102.0, 102.0), 1.5)
    high = SceneObject("high-car", Category.CAR, ["blue", "car"],
                       (500.0, 100.0, 13.5), (498.0, 98.0, 502.0, 102.0), 1.5)
    tall = SceneObject("tower", Category.BUILDING, ["grey", "tower"],
                       (100.0, 500.0, 40.0), (90.0, 490.0, 110.0, 510.0), 40.0)
    raise_block(s, 90, 490, 110, 510, 40.0)
    s.objects.extend([low, high, tall])
    return s


def test_flood_identity_at_zero():
    s = _two_level_scene()
    assert apply_flood(s, FloodSpec(0.0)) is s


def test_flood_hides_by_submersion_oracle():
    s = _two_level_scene()
    flooded = apply_flood(s, FloodSpec(6.0))
    # independent verdicts: tops at 1.5 (low), 13.5 (high), 40 (tower)
    assert "low-car" in flooded.hidden_object_ids
    assert "high-car" not in flooded.hidden_object_ids
    assert "tower" not in flooded.hidden_object_ids
    assert s.hidden_object_ids == frozenset()  # original untouched


def test_flood_above_everything_hides_ground_objects():
    s = _two_level_scene()
    g = SceneObject("lawn", Category.GROUND, ["green", "lawn"],
                    (200.0, 200.0, 0.2), (190.0, 190.0, 210.0, 210.0), 0.2)
    s.objects.append(g)
    flooded = apply_flood(s, FloodSpec(60.0))
    hidden = flooded.hidden_object_ids
    for o in s.objects:
        if o.category is Category.GROUND:
            assert o.id in hidden


def test_flood_protects_goal_object():
    s = _two_level_scene()
    flooded = apply_flood(s, FloodSpec(6.0), protected_ids=("low-car",))
    assert "low-car" not in flooded.hidden_object_ids


def test_flood_hides_submerged_landmarks(flat_scene):
    # flat ground at 0: any positive water covers every landmark cell
    flooded = apply_flood(flat_scene, FloodSpec(3.0))
    assert "Sidney Street" in flooded.hidden_landmark_names
    assert flooded.visible_landmarks() == []


def test_median_terrain(gen_scene):
    m = median_terrain_height(gen_scene)
    assert 0.0 <= m <= 150.0
    assert m == float(np.median(gen_scene.heightfield))
