"""Scripted navigation policies and trajectory replay.

The shortest-path planner is goal-aware by design: it exists to
generate upper-bound trajectories and training-data contrasts, never
to compete on the benchmark (agents under evaluation have no access to
goal coordinates).  The landmark pilot operationalizes the strategy
human operators exhibit: fly to the described landmark first, then
search its vicinity, descending onto a matching detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceDetected, NoLandmarkFound, SessionDone, Unreachable
from . import simcore
from .geodesy import (
    Action,
    MOTION_ACTIONS,
    Point3,
    Pose,
    apply_action,
    bearing_deg,
    euclidean_distance,
    yaw_error_deg,
)
from .gsm import (
    DescriptionCues,
    GsmStack,
    extract_cues,
    mask_centroid_world,
    nearest_set_cell_world,
    rasterize_landmarks,
    update_detections,
    update_fov,
)
from .metrics import TrajectoryLog
from .simcore import Episode, NoiseSpec, Observation, SessionState, step
from .worldmodel import Scene, terrain_height

BEARING_TOLERANCE_DEG = 15.0
HOVER_TOLERANCE_M = 3.6
RANDOM_STOP_PROB = 1.0 / 240.0


@dataclass
class PlanResult:
    actions: list[Action]
    planned_length: float


def oracle_plan(
    start: Pose,
    goal: Point3,
    floor_z: float = 0.0,
    max_steps: int = simcore.DEFAULT_MAX_STEPS,
) -> PlanResult:
    """Greedy discrete shortest path: aim, fly level, then sink onto the goal.

    Horizontal travel happens at the start altitude so the path stays
    clear of structures; the final descent is vertical, bottoming out
    at ``floor_z``.  Raises :class:`Unreachable` if the step budget runs
    out first.
    """
    pose = start
    actions: list[Action] = []
    length = 0.0
    z_target = max(goal[2], floor_z)
    while len(actions) < max_steps:
        if euclidean_distance(pose, goal) <= simcore.SUCCESS_RADIUS_M:
            actions.append(Action.STOP)
            return PlanResult(actions, length)
        h = pose.horizontal_distance(goal)
        if h > HOVER_TOLERANCE_M:
            err = yaw_error_deg(pose.yaw, bearing_deg(pose.x, pose.y, goal[0], goal[1]))
            if abs(err) > BEARING_TOLERANCE_DEG:
                a = Action.TURN_LEFT if err > 0 else Action.TURN_RIGHT
            else:
                a = Action.MOVE_FORWARD
        elif pose.z > z_target + 1.0:
            a = Action.DESCEND
        elif pose.z < z_target - 1.0:
            a = Action.ASCEND
        else:
            actions.append(Action.STOP)
            return PlanResult(actions, length)
        new = apply_action(pose, a)
        if a is Action.DESCEND and new.z < floor_z:
            new = Pose(new.x, new.y, floor_z, new.pitch, new.yaw)
        length += math.dist((pose.x, pose.y, pose.z), (new.x, new.y, new.z))
        pose = new
        actions.append(a)
    raise Unreachable(f"no plan within {max_steps} steps from {start} to {goal}")


class OracleAgent:
    """Executes a precomputed shortest-path plan."""

    tag = "oracle"
    needs_observation = False

    def __init__(self):
        self._plan: list[Action] = []

    def reset(self, scene: Scene, episode: Episode) -> None:
        goal = episode.goal_center
        floor = terrain_height(scene, goal[0], goal[1]) + simcore.TERRAIN_CLEARANCE_M
        self._plan = list(oracle_plan(episode.start_pose, goal, floor_z=floor).actions)

    def act(self, session: SessionState, obs: Observation | None) -> Action:
        if self._plan:
            return self._plan.pop(0)
        return Action.STOP


class RandomAgent:
    """Uniform motion babble with a 1/240 stop hazard per step."""

    tag = "random"
    needs_observation = False

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def reset(self, scene: Scene, episode: Episode) -> None:
        pass

    def act(self, session: SessionState, obs: Observation | None) -> Action:
        if self.rng.random() < RANDOM_STOP_PROB:
            return Action.STOP
        return MOTION_ACTIONS[int(self.rng.integers(len(MOTION_ACTIONS)))]


class LandmarkPilot:
    """Two-phase searcher mimicking human operators.

    Phase 1 flies toward the centroid of the description's landmarks.
    Phase 2 sweeps unexplored cells around the landmark, diverting to
    any map cell flagged as a potential goal, descending onto it and
    stopping low.  Without a usable landmark it falls back to an
    expanding ring sweep around the start point.
    """

    tag = "landmark-pilot"
    needs_observation = True

    def __init__(self, fov_deg: float = simcore.DEFAULT_FOV_DEG):
        self.fov_deg = fov_deg

    SEARCH_CORRIDOR_M = 120.0

    def reset(self, scene: Scene, episode: Episode) -> None:
        self.scene = scene
        self.gsm = GsmStack.for_scene(scene)
        try:
            self.cues = extract_cues(episode.description, scene)
            self.gsm.landmarks[:] = rasterize_landmarks(scene, self.cues,
                                                        self.gsm.resolution,
                                                        self.gsm.fov.shape)
        except NoLandmarkFound:
            self.cues = DescriptionCues([], [], [])
        self.region = self._corridor_mask() if self.gsm.landmarks.any() else None
        self.start_xy = (episode.start_pose.x, episode.start_pose.y)
        self._on_landmark_reached = False
        self._ring = 0
        self._ring_idx = 0
        self._descending = False
        self._prev_z = None

    def _corridor_mask(self) -> np.ndarray:
        """Cells within the search corridor around the mentioned landmarks."""
        g = self.gsm
        res = g.resolution
        rows, cols = g.landmarks.shape
        rad = int(math.ceil(self.SEARCH_CORRIDOR_M / res))
        idx = np.argwhere(g.landmarks)
        region = np.zeros_like(g.landmarks)
        if idx.size == 0:
            return region
        r0, c0 = idx.min(axis=0)
        r1, c1 = idx.max(axis=0)
        r0 = max(0, r0 - rad)
        c0 = max(0, c0 - rad)
        r1 = min(rows - 1, r1 + rad)
        c1 = min(cols - 1, c1 + rad)
        # distance to the landmark mask inside the padded bounding box,
        # via per-column/row mins against the set cells (boxes here are
        # rectangles, so the bounding-box metric is close enough)
        rr = np.arange(r0, r1 + 1)
        cc = np.arange(c0, c1 + 1)
        dr = np.maximum(np.maximum(idx[:, 0].min() - rr, rr - idx[:, 0].max()), 0)
        dc = np.maximum(np.maximum(idx[:, 1].min() - cc, cc - idx[:, 1].max()), 0)
        d2 = dr[:, None] ** 2 + dc[None, :] ** 2
        region[r0:r1 + 1, c0:c1 + 1] = d2 <= rad * rad
        return region

    # -- helpers ---------------------------------------------------------

    def _steer(self, p: Pose, tx: float, ty: float) -> Action:
        err = yaw_error_deg(p.yaw, bearing_deg(p.x, p.y, tx, ty))
        if abs(err) > BEARING_TOLERANCE_DEG:
            return Action.TURN_LEFT if err > 0 else Action.TURN_RIGHT
        return Action.MOVE_FORWARD

    def _fallback_waypoint(self, p: Pose) -> tuple[float, float]:
        radii = [60.0 * (k + 1) for k in range(6)]
        w, h = self.scene.extent
        while True:
            r = radii[min(self._ring, len(radii) - 1)]
            ang = self._ring_idx * (math.pi / 4.0)
            tx = min(w - 5, max(5, self.start_xy[0] + r * math.cos(ang)))
            ty = min(h - 5, max(5, self.start_xy[1] + r * math.sin(ang)))
            if math.hypot(p.x - tx, p.y - ty) > 12.0:
                return (tx, ty)
            self._ring_idx += 1
            if self._ring_idx >= 8:
                self._ring_idx = 0
                self._ring += 1

    def act(self, session: SessionState, obs: Observation) -> Action:
        p = obs.observed_pose
        g = self.gsm
        box = self._fov_box(p)
        unexplored = 1.0 - float(g.explored[box].mean()) if g.explored[box].size else 0.0
        update_fov(g, p, self.fov_deg)
        update_detections(g, obs, self.scene, self.cues)

        # unstick: last forward was rejected, climb over whatever blocked it
        if session.collisions and session.collisions[-1] == session.step_count - 1:
            self._descending = False
            return Action.ASCEND

        # humans reach the described landmark before hunting the goal;
        # only divert to detections once the overflight is done
        target = None
        if self.region is None or self._on_landmark_reached:
            target = self._goal_target(p)
        if target is not None:
            d = math.hypot(p.x - target[0], p.y - target[1])
            if d <= 6.0:
                alt = p.z - self._terrain(p)
                if alt <= 8.0 or (self._descending and self._prev_z is not None
                                  and p.z >= self._prev_z - 1e-9):
                    return Action.STOP
                self._descending = True
                self._prev_z = p.z
                return Action.DESCEND
            self._descending = False
            return self._steer(p, *target)

        self._descending = False
        if unexplored > 0.8 and p.z < 148.0:
            return Action.ASCEND

        if self.region is not None:
            if not self._on_landmark_reached:
                r, c = g.cell_of(p.x, p.y)
                if g.landmarks[r, c]:
                    self._on_landmark_reached = True
                else:
                    cell = nearest_set_cell_world(g.landmarks, g.resolution, p.x, p.y)
                    if cell is None:
                        self._on_landmark_reached = True
                    elif math.hypot(p.x - cell[0], p.y - cell[1]) > 4.0:
                        return self._steer(p, *cell)
                    else:
                        self._on_landmark_reached = True
            frontier = ~g.explored & self.region
            for radius in (150.0, 400.0, None):
                sweep = nearest_set_cell_world(frontier, g.resolution, p.x, p.y,
                                               radius_m=radius)
                if sweep is not None:
                    break
            if sweep is not None and math.hypot(p.x - sweep[0], p.y - sweep[1]) > 8.0:
                return self._steer(p, *sweep)
            # corridor fully seen and nothing matched: widen the view
            return Action.ASCEND if p.z < 148.0 else Action.TURN_LEFT

        return self._steer(p, *self._fallback_waypoint(p))

    def _goal_target(self, p: Pose) -> tuple[float, float] | None:
        """Centroid of the potential-goal cluster worth approaching, if any."""
        g = self.gsm
        pg = g.potential_goals
        if not pg.any():
            return None
        if self.region is not None:
            pg = pg & self.region
            if not pg.any():
                return None
        seed = nearest_set_cell_world(pg, g.resolution, p.x, p.y)
        if seed is None:
            return None
        res = g.resolution
        rad = int(math.ceil(25.0 / res))
        r = int(seed[1] / res)
        c = int(seed[0] / res)
        rows, cols = pg.shape
        win = pg[max(0, r - rad):min(rows, r + rad + 1),
                 max(0, c - rad):min(cols, c + rad + 1)]
        idx = np.argwhere(win)
        cy = (idx[:, 0].mean() + max(0, r - rad) + 0.5) * res
        cx = (idx[:, 1].mean() + max(0, c - rad) + 0.5) * res
        return (float(cx), float(cy))

    def _terrain(self, p: Pose) -> float:
        w, h = self.scene.extent
        return terrain_height(self.scene, min(w, max(0.0, p.x)), min(h, max(0.0, p.y)))

    def _fov_box(self, p: Pose):
        res = self.gsm.resolution
        side = 2.0 * p.z * math.tan(math.radians(self.fov_deg) / 2.0)
        rows, cols = self.gsm.fov.shape
        i0 = max(0, int((p.y - side / 2) / res))
        i1 = min(rows, int((p.y + side / 2) / res) + 1)
        j0 = max(0, int((p.x - side / 2) / res))
        j1 = min(cols, int((p.x + side / 2) / res) + 1)
        return (slice(i0, i1), slice(j0, j1))


def run_episode(
    scene: Scene,
    episode: Episode,
    agent,
    noise: NoiseSpec = NoiseSpec(),
    max_steps: int = simcore.DEFAULT_MAX_STEPS,
    fov_deg: float = simcore.DEFAULT_FOV_DEG,
    seed: int | None = None,
) -> TrajectoryLog:
    """Fly one episode with an agent and record its trajectory."""
    rng = np.random.default_rng(seed) if seed is not None else np.random.default_rng(0)
    agent.reset(scene, episode)
    session = SessionState.begin(episode.start_pose, rng=rng)
    obs = (simcore.observe_cheap(scene, session.observed_pose, fov_deg)
           if agent.needs_observation else None)
    while not session.done:
        action = agent.act(session, obs)
        session, obs = step(session, scene, action, noise=noise,
                            max_steps=max_steps, fov_deg=fov_deg,
                            observe=agent.needs_observation)
    final = session.pose
    return TrajectoryLog(
        episode_id=episode.id,
        agent_tag=agent.tag,
        actions=list(session.actions),
        poses=list(session.visited),
        stopped=not session.truncated,
        final_distance=euclidean_distance(final, episode.goal_center),
        wall_time=0.35 * len(session.actions),  # nominal keystroke pacing
        collisions=list(session.collisions),
    )


def replay(log: TrajectoryLog, scene: Scene, episode: Episode,
           max_steps: int | None = None) -> TrajectoryLog:
    """Re-execute a log's actions and verify every pose bit-for-bit."""
    log.validate()
    limit = max_steps if max_steps is not None else max(len(log.actions) + 1,
                                                        simcore.DEFAULT_MAX_STEPS)
    session = SessionState.begin(log.poses[0])
    if (session.pose.x, session.pose.y, session.pose.z,
            session.pose.pitch, session.pose.yaw) != (
            log.poses[0].x, log.poses[0].y, log.poses[0].z,
            log.poses[0].pitch, log.poses[0].yaw):
        raise DivergenceDetected(0)
    for i, action in enumerate(log.actions):
        try:
            session, _ = step(session, scene, action, max_steps=limit, observe=False)
        except SessionDone:
            raise DivergenceDetected(i + 1, f"log continues past stop at index {i + 1}")
        got = session.pose
        want = log.poses[i + 1]
        if (got.x, got.y, got.z, got.pitch, got.yaw) != (
                want.x, want.y, want.z, want.pitch, want.yaw):
            raise DivergenceDetected(i + 1)
    return TrajectoryLog(
        episode_id=log.episode_id,
        agent_tag="replay",
        actions=list(log.actions),
        poses=list(session.visited),
        stopped=log.stopped,
        final_distance=euclidean_distance(session.pose, episode.goal_center),
        wall_time=log.wall_time,
        collisions=list(session.collisions),
    )
