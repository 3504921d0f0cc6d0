"""Evaluation metrics and corpus statistics over trajectory logs.

Navigation error uses the full 3D distance, matching the spherical
success region.  The optimal path length for SPL is the 3D straight
line from start to goal, which lower-bounds every flyable path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import LengthMismatch, UnknownEpisode
from .geodesy import Action, Pose, euclidean_distance
from .simcore import SUCCESS_RADIUS_M, Episode, is_success
from .worldmodel import Scene, point_in_landmark

NEAR_LANDMARK_RADII_M = (20.0, 40.0)


@dataclass
class TrajectoryLog:
    episode_id: str
    agent_tag: str
    actions: list[Action]
    poses: list[Pose]  # length = len(actions) + 1
    stopped: bool
    final_distance: float
    wall_time: float = 0.0
    collisions: list[int] = field(default_factory=list)

    def validate(self) -> None:
        if len(self.poses) != len(self.actions) + 1:
            raise LengthMismatch(
                f"log {self.episode_id}: {len(self.poses)} poses vs {len(self.actions)} actions"
            )

    def path_length(self) -> float:
        total = 0.0
        for a, b in zip(self.poses, self.poses[1:]):
            total += math.dist((a.x, a.y, a.z), (b.x, b.y, b.z))
        return total

    def to_json(self) -> dict:
        return {
            "episode_id": self.episode_id,
            "agent_tag": self.agent_tag,
            "actions": [a.value for a in self.actions],
            "poses": [p.to_json() for p in self.poses],
            "stopped": self.stopped,
            "final_distance": self.final_distance,
            "wall_time": self.wall_time,
            "collisions": list(self.collisions),
        }

    @classmethod
    def from_json(cls, d: dict) -> "TrajectoryLog":
        log = cls(
            d["episode_id"],
            d["agent_tag"],
            [Action.from_wire(a) for a in d["actions"]],
            [Pose.from_json(p) for p in d["poses"]],
            d["stopped"],
            d["final_distance"],
            d.get("wall_time", 0.0),
            list(d.get("collisions", [])),
        )
        log.validate()
        return log


@dataclass
class MetricSet:
    ne_mean: float
    sr: float   # percent
    osr: float  # percent
    spl: float  # percent
    n: int

    def to_json(self) -> dict:
        return {"ne": self.ne_mean, "sr": self.sr, "osr": self.osr,
                "spl": self.spl, "n": self.n}


@dataclass
class EvalReport:
    overall: MetricSet
    by_category: dict
    by_split: dict

    def to_json(self) -> dict:
        return {
            "metrics": self.overall.to_json(),
            "by_category": {k: v.to_json() for k, v in self.by_category.items()},
            "by_split": {k: v.to_json() for k, v in self.by_split.items()},
            "n": self.overall.n,
        }


def _aggregate(rows: list[tuple[float, bool, bool, float]]) -> MetricSet:
    n = len(rows)
    if n == 0:
        return MetricSet(0.0, 0.0, 0.0, 0.0, 0)
    ne = sum(r[0] for r in rows) / n
    sr = 100.0 * sum(r[1] for r in rows) / n
    osr = 100.0 * sum(r[2] for r in rows) / n
    spl = 100.0 * sum(r[3] for r in rows) / n
    return MetricSet(ne, sr, osr, spl, n)


def evaluate(logs: list[TrajectoryLog], episodes: dict[str, Episode]) -> EvalReport:
    """Compute NE / SR / OSR / SPL overall and per category and split."""
    rows = []
    cats: dict[str, list] = {}
    splits: dict[str, list] = {}
    for log in logs:
        log.validate()
        ep = episodes.get(log.episode_id)
        if ep is None:
            raise UnknownEpisode(log.episode_id)
        goal = ep.goal_center
        final = log.poses[-1]
        ne = euclidean_distance(final, goal)
        success = is_success(final, goal)
        oracle = any(is_success(p, goal) for p in log.poses)
        l = euclidean_distance(log.poses[0], goal)
        p_len = log.path_length()
        spl_i = (l / max(p_len, l)) if success and max(p_len, l) > 0 else 0.0
        row = (ne, success, oracle, spl_i)
        rows.append(row)
        cats.setdefault(ep.goal_category.value, []).append(row)
        splits.setdefault(ep.split.value, []).append(row)
    return EvalReport(
        overall=_aggregate(rows),
        by_category={k: _aggregate(v) for k, v in sorted(cats.items())},
        by_split={k: _aggregate(v) for k, v in sorted(splits.items())},
    )


@dataclass
class Histogram:
    edges: list[float]
    counts: list[int]

    def to_json(self) -> dict:
        return {"edges": self.edges, "counts": self.counts}

    @classmethod
    def of(cls, values, edges) -> "Histogram":
        counts, edges = np.histogram(np.asarray(values, float), bins=edges)
        return cls([float(e) for e in edges], [int(c) for c in counts])


@dataclass
class StatsReport:
    n_logs: int
    dist_to_goal: Histogram
    description_words: Histogram
    actions_per_trajectory: Histogram
    mean_actions: float
    action_proportions: dict[str, float]
    action_proportions_near_landmark: dict[str, float]
    action_proportions_elsewhere: dict[str, float]
    altitude_by_distance_bin: dict  # {"edges": [...], "mean_altitude": [...]}
    landmark_pass_rate: float          # over the polygon itself
    landmark_near_rates: dict[str, float]  # within 20 m / 40 m of centroid

    def to_json(self) -> dict:
        return {
            "n_logs": self.n_logs,
            "dist_to_goal": self.dist_to_goal.to_json(),
            "description_words": self.description_words.to_json(),
            "actions_per_trajectory": self.actions_per_trajectory.to_json(),
            "mean_actions": self.mean_actions,
            "action_proportions": self.action_proportions,
            "action_proportions_near_landmark": self.action_proportions_near_landmark,
            "action_proportions_elsewhere": self.action_proportions_elsewhere,
            "altitude_by_distance_bin": self.altitude_by_distance_bin,
            "landmark_pass_rate": self.landmark_pass_rate,
            "landmark_near_rates": self.landmark_near_rates,
        }


def _mentioned_landmarks(ep: Episode, scene: Scene):
    from .gsm import extract_cues  # deferred to avoid an import cycle
    from .errors import NoLandmarkFound
    try:
        cues = extract_cues(ep.description, scene)
    except NoLandmarkFound:
        return []
    by_name = {l.name: l for l in scene.landmarks}
    return [by_name[n] for n in cues.landmark_names if n in by_name]


def dataset_stats(
    logs: list[TrajectoryLog],
    episodes: dict[str, Episode],
    scenes: dict[str, Scene],
) -> StatsReport:
    """Corpus-level distributions plus landmark-relative flight statistics."""
    action_counts = {a.value: 0 for a in Action}
    near_counts = {a.value: 0 for a in Action}
    far_counts = {a.value: 0 for a in Action}
    lengths = []
    dists = []
    words = []
    alt_bins: dict[int, list[float]] = {}
    passed = 0
    near = {r: 0 for r in NEAR_LANDMARK_RADII_M}
    with_landmarks = 0

    for log in logs:
        ep = episodes[log.episode_id]
        scene = scenes[ep.scene_id]
        goal = ep.goal_center
        lengths.append(len(log.actions))
        dists.append(log.poses[0].horizontal_distance(goal))
        words.append(len(ep.description.split()))
        lms = _mentioned_landmarks(ep, scene)
        if lms:
            with_landmarks += 1
        centroids = [l.centroid() for l in lms]
        boxes = []
        for l in lms:
            xs = [q[0] for q in l.polygon]
            ys = [q[1] for q in l.polygon]
            boxes.append((min(xs), min(ys), max(xs), max(ys)))

        over = False
        near_hit = {r: False for r in NEAR_LANDMARK_RADII_M}
        for pose, action in zip(log.poses, log.actions):
            action_counts[action.value] += 1
            d_goal = pose.horizontal_distance(goal)
            alt_bins.setdefault(int(d_goal // 20.0), []).append(pose.z)
            on_landmark = False
            for l, c, b in zip(lms, centroids, boxes):
                dc = math.hypot(pose.x - c[0], pose.y - c[1])
                for r in NEAR_LANDMARK_RADII_M:
                    if dc <= r:
                        near_hit[r] = True
                if (b[0] <= pose.x <= b[2] and b[1] <= pose.y <= b[3]
                        and point_in_landmark(l, pose.x, pose.y)):
                    on_landmark = True
            if on_landmark:
                over = True
                near_counts[action.value] += 1
            else:
                far_counts[action.value] += 1
        if over:
            passed += 1
        for r in NEAR_LANDMARK_RADII_M:
            if near_hit[r]:
                near[r] += 1

    def _props(counts):
        total = sum(counts.values())
        return {k: (v / total if total else 0.0) for k, v in counts.items()}

    bin_keys = sorted(alt_bins)
    denom = max(1, with_landmarks)
    return StatsReport(
        n_logs=len(logs),
        dist_to_goal=Histogram.of(dists, np.arange(0, 551, 50)),
        description_words=Histogram.of(words, np.arange(0, 41, 4)),
        actions_per_trajectory=Histogram.of(lengths, np.arange(0, 521, 40)),
        mean_actions=float(np.mean(lengths)) if lengths else 0.0,
        action_proportions=_props(action_counts),
        action_proportions_near_landmark=_props(near_counts),
        action_proportions_elsewhere=_props(far_counts),
        altitude_by_distance_bin={
            "edges": [k * 20.0 for k in bin_keys],
            "mean_altitude": [float(np.mean(alt_bins[k])) for k in bin_keys],
        },
        landmark_pass_rate=passed / denom,
        landmark_near_rates={f"{int(r)}m": near[r] / denom for r in NEAR_LANDMARK_RADII_M},
    )
