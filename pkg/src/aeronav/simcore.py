"""Episode lifecycle: start sampling, stepping, termination, flooding.

One session owns a mutable :class:`SessionState`; the scene it flies
over is immutable and may be shared across sessions.  All stochastic
behavior (start sampling, pose noise) draws from generators passed in
by the caller, so runs are reproducible from seeds alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import NoValidStart, OutOfExtent, SessionDone
from .geodesy import (
    ALTITUDE_CEILING_M,
    Action,
    Point3,
    Pose,
    apply_action,
    euclidean_distance,
)
from .worldmodel import Category, Scene, _sample_bilinear, terrain_height

SUCCESS_RADIUS_M = 20.0
TERRAIN_CLEARANCE_M = 5.0
DEFAULT_MAX_STEPS = 500
DEFAULT_FOV_DEG = 90.0
START_MIN_RADIUS_M = 50.0
START_MAX_RADIUS_M = 500.0
START_ALTITUDE_RANGE_M = (100.0, 150.0)


class Split(Enum):
    TRAIN = "train"
    VAL_SEEN = "val_seen"
    VAL_UNSEEN = "val_unseen"
    TEST_UNSEEN = "test_unseen"


@dataclass(frozen=True)
class Episode:
    id: str
    scene_id: str
    description: str
    goal_center: Point3
    goal_object_id: str
    goal_category: Category
    start_pose: Pose
    split: Split

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "scene_id": self.scene_id,
            "description": self.description,
            "goal_center": list(self.goal_center),
            "goal_object_id": self.goal_object_id,
            "goal_category": self.goal_category.value,
            "start_pose": self.start_pose.to_json(),
            "split": self.split.value,
        }

    @classmethod
    def from_json(cls, d: dict) -> "Episode":
        return cls(
            d["id"],
            d["scene_id"],
            d["description"],
            tuple(d["goal_center"]),
            d["goal_object_id"],
            Category(d["goal_category"]),
            Pose.from_json(d["start_pose"]),
            Split(d["split"]),
        )


@dataclass(frozen=True)
class NoiseSpec:
    enabled: bool = False
    sigma: float = 50.0
    clip: float = 100.0

    def __post_init__(self):
        if self.enabled and not (self.clip >= self.sigma >= 0):
            raise ValueError("need clip >= sigma >= 0")


@dataclass(frozen=True)
class FloodSpec:
    water_level: float

    def __post_init__(self):
        if not (0.0 <= self.water_level <= 150.0):
            raise ValueError("water_level must be in [0, 150]")


@dataclass(frozen=True)
class Observation:
    observed_pose: Pose
    visible_objects: list  # (object_id, (u0, v0, u1, v1)) normalized screen boxes
    rgb: np.ndarray | None = None
    depth: np.ndarray | None = None


@dataclass
class SessionState:
    pose: Pose
    observed_pose: Pose
    step_count: int = 0
    done: bool = False
    truncated: bool = False
    visited: list = field(default_factory=list)   # poses, length step_count + 1
    actions: list = field(default_factory=list)
    collisions: list = field(default_factory=list)  # step indices of rejected moves
    rng: np.random.Generator | None = None

    @classmethod
    def begin(cls, start: Pose, rng: np.random.Generator | None = None) -> "SessionState":
        return cls(pose=start, observed_pose=start, visited=[start], rng=rng)


def is_success(stop_pose: Pose | Point3, goal: Point3) -> bool:
    """Inside (or exactly on) the success sphere around the goal."""
    return euclidean_distance(stop_pose, goal) <= SUCCESS_RADIUS_M


def sample_start(
    scene: Scene,
    goal: Point3,
    rng: np.random.Generator,
    clearance: float = TERRAIN_CLEARANCE_M,
    pitch: float = -45.0,
) -> Pose:
    """Draw a start pose uniformly over the annulus around the goal.

    Radius is uniform over the disc area between 50 and 500 m, altitude
    uniform in [100, 150], yaw one of the twelve 30-degree headings.
    Rejection keeps the point inside the scene and above terrain.
    """
    w, h = scene.extent
    r2min = START_MIN_RADIUS_M ** 2
    r2max = START_MAX_RADIUS_M ** 2
    for _ in range(20000):
        r = math.sqrt(rng.uniform(r2min, r2max))
        ang = rng.uniform(0, 2 * math.pi)
        x = goal[0] + r * math.cos(ang)
        y = goal[1] + r * math.sin(ang)
        if not (0 <= x <= w and 0 <= y <= h):
            continue
        z = rng.uniform(*START_ALTITUDE_RANGE_M)
        if z < terrain_height(scene, x, y) + clearance:
            continue
        yaw = 30.0 * int(rng.integers(12))
        return Pose(x, y, z, pitch, yaw)
    raise NoValidStart(f"no valid start around {goal} in scene {scene.id}")


def observe_cheap(
    scene: Scene,
    observed_pose: Pose,
    fov_deg: float = DEFAULT_FOV_DEG,
) -> Observation:
    """Geometric top-down observation without rasterizing any image.

    Visible objects are those whose center lies inside the square
    ground footprint of the downward view and below the agent; screen
    boxes are the normalized positions inside that square.
    """
    p = observed_pose
    side = max(2.0, 2.0 * p.z * math.tan(math.radians(fov_deg) / 2.0))
    x0, y0 = p.x - side / 2, p.y - side / 2
    ids, centers, footprints = _object_arrays(scene)
    if not ids:
        return Observation(observed_pose=p, visible_objects=[])
    u = (centers[:, 0] - x0) / side
    v = (centers[:, 1] - y0) / side
    mask = (centers[:, 2] < p.z) & (u >= 0) & (u <= 1) & (v >= 0) & (v <= 1)
    visible = []
    for k in np.nonzero(mask)[0]:
        fx0, fy0, fx1, fy1 = footprints[k]
        visible.append((ids[k], (
            (fx0 - x0) / side, (fy0 - y0) / side,
            (fx1 - x0) / side, (fy1 - y0) / side,
        )))
    return Observation(observed_pose=p, visible_objects=visible)


def _object_arrays(scene: Scene):
    # cached per scene; the object list is immutable after load
    cache = getattr(scene, "_obs_cache", None)
    if cache is None:
        objs = scene.detectable_objects()
        cache = (
            [o.id for o in objs],
            np.array([o.center for o in objs], dtype=float).reshape(-1, 3),
            np.array([o.footprint for o in objs], dtype=float).reshape(-1, 4),
        )
        scene._obs_cache = cache
    return cache


def step(
    session: SessionState,
    scene: Scene,
    action: Action,
    noise: NoiseSpec = NoiseSpec(),
    max_steps: int = DEFAULT_MAX_STEPS,
    clearance: float = TERRAIN_CLEARANCE_M,
    fov_deg: float = DEFAULT_FOV_DEG,
    observe: bool = True,
) -> tuple[SessionState, Observation | None]:
    """Advance the session by one action and return a cheap observation.

    Forward moves that would leave the scene or enter a structure
    (terrain plus clearance above the current altitude) are rejected as
    flagged no-ops.  Vertical motion is clamped to
    ``[terrain + clearance, 200]``.  Noise, when enabled, perturbs the
    observed pose only; the true pose drives all physics.
    """
    if session.done:
        raise SessionDone("session is already done")

    p = session.pose
    w, h = scene.extent
    if action is Action.MOVE_FORWARD:
        cand = apply_action(p, action)
        if not (0 <= cand.x <= w and 0 <= cand.y <= h):
            new_pose = p
            session.collisions.append(session.step_count)
        elif terrain_height(scene, cand.x, cand.y) + clearance > p.z:
            new_pose = p
            session.collisions.append(session.step_count)
        else:
            new_pose = cand
    else:
        cand = apply_action(p, action)
        floor = terrain_height(scene, cand.x, cand.y) + clearance
        z = min(ALTITUDE_CEILING_M, max(cand.z, floor))
        new_pose = replace(cand, z=z) if z != cand.z else cand

    session.pose = new_pose
    session.step_count += 1
    session.actions.append(action)
    session.visited.append(new_pose)
    if action is Action.STOP:
        session.done = True
    elif session.step_count >= max_steps:
        session.done = True
        session.truncated = True

    if noise.enabled:
        rng = session.rng
        if rng is None:
            raise ValueError("noise enabled but session has no rng")
        dx = float(np.clip(rng.normal(0.0, noise.sigma), -noise.clip, noise.clip))
        dy = float(np.clip(rng.normal(0.0, noise.sigma), -noise.clip, noise.clip))
        session.observed_pose = replace(new_pose, x=new_pose.x + dx, y=new_pose.y + dy)
    else:
        session.observed_pose = new_pose

    obs = observe_cheap(scene, session.observed_pose, fov_deg) if observe else None
    return session, obs


def apply_flood(scene: Scene, flood: FloodSpec, protected_ids: tuple = ()) -> Scene:
    """Derive a flooded scene: objects and landmarks mostly underwater vanish.

    An object sample point is submerged when the water plane reaches its
    top there (for buildings the heightfield already carries the roof);
    a landmark cell is submerged when water covers the terrain.  Objects
    in ``protected_ids`` (episode goals) are never hidden.  The input
    scene is untouched.
    """
    wl = flood.water_level
    if wl <= 0:
        return scene

    hidden_objects = set()
    for o in scene.objects:
        if o.id in protected_ids:
            continue
        if _submerged_fraction(scene, o.footprint,
                               0.0 if o.category is Category.BUILDING else o.height,
                               wl) >= 0.5:
            hidden_objects.add(o.id)

    hidden_landmarks = set()
    for l in scene.landmarks:
        xs = [p[0] for p in l.polygon]
        ys = [p[1] for p in l.polygon]
        box = (min(xs), min(ys), max(xs), max(ys))
        if _submerged_fraction(scene, box, 0.0, wl, strict=True) >= 0.5:
            hidden_landmarks.add(l.name)

    return Scene(
        id=scene.id,
        extent=scene.extent,
        cell_size=scene.cell_size,
        heightfield=scene.heightfield,
        objects=scene.objects,
        landmarks=scene.landmarks,
        transform=scene.transform,
        water_level=wl,
        hidden_object_ids=frozenset(hidden_objects),
        hidden_landmark_names=frozenset(hidden_landmarks),
    )


def _submerged_fraction(
    scene: Scene,
    box: tuple[float, float, float, float],
    extra_height: float,
    water_level: float,
    strict: bool = False,
    n: int = 5,
) -> float:
    x0, y0, x1, y1 = box
    xs = np.linspace(x0, x1, n)
    ys = np.linspace(y0, y1, n)
    gx, gy = np.meshgrid(xs, ys)
    w, h = scene.extent
    gx = np.clip(gx, 0, w)
    gy = np.clip(gy, 0, h)
    tops = _sample_bilinear(scene.heightfield, scene.cell_size,
                            gx.ravel(), gy.ravel()) + extra_height
    if strict:
        return float(np.mean(tops < water_level))
    return float(np.mean(water_level >= tops))


def median_terrain_height(scene: Scene) -> float:
    return float(np.median(scene.heightfield))
