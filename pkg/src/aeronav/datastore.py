"""Corpus persistence, split management, description synthesis, and QC.

A corpus on disk is a directory:

    manifest.json       scene ids, split assignment, schema version
    episodes.jsonl      one episode per line
    logs/<tag>.jsonl    one trajectory per line, per agent tag
    scenes/<id>/        scene.json + scene.hgt per worldmodel

Everything is JSON Lines so large corpora stream and diff cleanly.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import NoLandmarkFound, TooFewScenes
from .geodesy import bearing_deg
from .metrics import TrajectoryLog
from .simcore import Episode, Split, is_success, sample_start
from .worldmodel import (
    GeneratorParams,
    Scene,
    SceneObject,
    generate_scene,
    landmark_distance,
    load_scene,
    save_scene,
    terrain_height,
)

GOAL_LANDMARK_MAX_DISTANCE_M = 100.0

SCHEMA_VERSION = 1
DEFAULT_SPLIT_WEIGHTS = (24, 4, 6)  # train : val_unseen : test_unseen scene counts
VAL_SEEN_FRACTION = 0.1

_COMPASS = [
    "east", "northeast", "north", "northwest",
    "west", "southwest", "south", "southeast",
]


def compass_word(bearing: float) -> str:
    """8-way compass label for a bearing in degrees (0 = east, CCW)."""
    return _COMPASS[int(((bearing + 22.5) % 360.0) // 45.0)]


def make_splits(
    scene_ids: list[str],
    weights: tuple[int, int, int] = DEFAULT_SPLIT_WEIGHTS,
    seed: int = 0,
) -> dict[str, Split]:
    """Scene-level partition into train / val-unseen / test-unseen.

    Proportions follow ``weights`` scaled to the available scene count;
    every split gets at least one scene.  Val-seen is an episode-level
    holdout inside train scenes, so it does not appear here.
    """
    n = len(scene_ids)
    if n < 4:
        raise TooFewScenes(f"need at least 4 scenes, got {n}")
    rng = np.random.default_rng(seed)
    order = list(scene_ids)
    rng.shuffle(order)
    total = sum(weights)
    n_val = max(1, round(n * weights[1] / total))
    n_test = max(1, round(n * weights[2] / total))
    if n_val + n_test >= n:
        n_val = n_test = 1
    assignment: dict[str, Split] = {}
    for i, sid in enumerate(order):
        if i < n_val:
            assignment[sid] = Split.VAL_UNSEEN
        elif i < n_val + n_test:
            assignment[sid] = Split.TEST_UNSEEN
        else:
            assignment[sid] = Split.TRAIN
    return assignment


def synthesize_description(
    scene: Scene,
    goal_object: SceneObject,
    rng: np.random.Generator,
) -> str:
    """Template sentence tying the goal object to its nearest landmark.

    Always contains the goal's descriptive tokens, a category word, the
    landmark's exact name, and an 8-way compass relation, so that cue
    extraction can recover all three deterministically.
    """
    if not scene.landmarks:
        raise NoLandmarkFound(f"scene {scene.id} has no landmarks")
    gx, gy, _ = goal_object.center
    lm = min(scene.landmarks, key=lambda l: landmark_distance(l, gx, gy))
    cx, cy = lm.centroid()
    relation = compass_word(bearing_deg(cx, cy, gx, gy))
    tokens = " ".join(goal_object.name_tokens)
    openers = ["go to", "fly to", "find", "head to", "navigate to"]
    opener = openers[int(rng.integers(len(openers)))]
    text = f"{opener} the {tokens} {relation} of {lm.name}"

    # sometimes anchor with a nearby second object for extra context
    if rng.random() < 0.5:
        best = None
        best_d = 80.0
        for o in scene.objects:
            if o.id == goal_object.id:
                continue
            d = math.hypot(o.center[0] - gx, o.center[1] - gy)
            if d < best_d and o.name_tokens != goal_object.name_tokens:
                best, best_d = o, d
        if best is not None:
            text += f", near the {' '.join(best.name_tokens)}"
    return text


def _goal_near_landmark(scene: Scene, obj: SceneObject) -> bool:
    # descriptions anchor goals to landmarks, so only objects in a
    # landmark's vicinity make coherent episodes
    gx, gy, _ = obj.center
    return any(landmark_distance(l, gx, gy) <= GOAL_LANDMARK_MAX_DISTANCE_M
               for l in scene.landmarks)


def _goal_reachable(scene: Scene, obj: SceneObject) -> bool:
    # the success sphere must be reachable from above: nearby terrain
    # (including adjacent roofs) must not tower over the goal
    gx, gy, gz = obj.center
    w, h = scene.extent
    for dx in (-4.0, 0.0, 4.0):
        for dy in (-4.0, 0.0, 4.0):
            x = min(w, max(0.0, gx + dx))
            y = min(h, max(0.0, gy + dy))
            if terrain_height(scene, x, y) > gz + 8.0:
                return False
    return True


def make_episodes(
    scene: Scene,
    n: int,
    rng: np.random.Generator,
    split: Split = Split.TRAIN,
) -> list[Episode]:
    """Sample episodes over a scene's reachable goal objects."""
    candidates = [o for o in scene.objects
                  if _goal_reachable(scene, o) and _goal_near_landmark(scene, o)]
    if not candidates:
        return []
    episodes = []
    k = 0
    attempts = 0
    while len(episodes) < n and attempts < 20 * n:
        attempts += 1
        obj = candidates[int(rng.integers(len(candidates)))]
        try:
            desc = synthesize_description(scene, obj, rng)
            start = sample_start(scene, obj.center, rng)
        except Exception:
            continue
        episodes.append(Episode(
            id=f"ep-{scene.id}-{k:04d}",
            scene_id=scene.id,
            description=desc,
            goal_center=obj.center,
            goal_object_id=obj.id,
            goal_category=obj.category,
            start_pose=start,
            split=split,
        ))
        k += 1
    return episodes


@dataclass
class Corpus:
    scenes: dict[str, Scene]
    episodes: list[Episode]
    logs: dict[str, list[TrajectoryLog]] = field(default_factory=dict)
    split_assignment: dict[str, Split] = field(default_factory=dict)

    def episode_index(self) -> dict[str, Episode]:
        return {e.id: e for e in self.episodes}

    def validate(self) -> None:
        eps = self.episode_index()
        for e in self.episodes:
            if e.scene_id not in self.scenes:
                raise ValueError(f"episode {e.id} references unknown scene {e.scene_id}")
        for tag, logs in self.logs.items():
            for log in logs:
                if log.episode_id not in eps:
                    raise ValueError(f"log in {tag} references unknown episode {log.episode_id}")
        train = {s for s, sp in self.split_assignment.items() if sp is Split.TRAIN}
        for s, sp in self.split_assignment.items():
            if sp in (Split.VAL_UNSEEN, Split.TEST_UNSEEN) and s in train:
                raise ValueError(f"scene {s} is both train and unseen")


def generate_corpus(
    seed: int,
    n_scenes: int = 4,
    episodes_per_scene: int = 25,
    params: GeneratorParams | None = None,
) -> Corpus:
    """Scenes, splits, and described episodes from one master seed."""
    scenes = {}
    for k in range(n_scenes):
        s = generate_scene(seed * 1000 + k, params)
        scenes[s.id] = s
    assignment = make_splits(list(scenes), seed=seed)
    episodes: list[Episode] = []
    for k, (sid, scene) in enumerate(sorted(scenes.items())):
        split = assignment[sid]
        rng = np.random.default_rng([seed, k])
        eps = make_episodes(scene, episodes_per_scene, rng, split)
        if split is Split.TRAIN:
            # hold out a slice of train-scene episodes as val-seen
            n_hold = max(1, int(len(eps) * VAL_SEEN_FRACTION)) if len(eps) > 1 else 0
            eps = ([dataclasses.replace(e, split=Split.VAL_SEEN) for e in eps[:n_hold]]
                   + eps[n_hold:])
        episodes.extend(eps)
    corpus = Corpus(scenes=scenes, episodes=episodes, split_assignment=assignment)
    corpus.validate()
    return corpus


def qc_filter(
    logs: list[TrajectoryLog],
    episodes: dict[str, Episode],
) -> tuple[list[TrajectoryLog], list[TrajectoryLog]]:
    """Drop failed trajectories and extreme-duration outliers.

    A log is rejected if its final pose misses the success sphere, or
    its wall time exceeds twice the corpus mean wall time.
    """
    if not logs:
        return [], []
    mean_time = sum(l.wall_time for l in logs) / len(logs)
    accepted, rejected = [], []
    for log in logs:
        ep = episodes[log.episode_id]
        ok = is_success(log.poses[-1], ep.goal_center)
        if ok and (mean_time <= 0 or log.wall_time <= 2.0 * mean_time):
            accepted.append(log)
        else:
            rejected.append(log)
    return accepted, rejected


# --------------------------------------------------------------------------
# disk format


def save_corpus(corpus: Corpus, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for sid, scene in sorted(corpus.scenes.items()):
        save_scene(scene, directory / "scenes" / sid)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "scene_ids": sorted(corpus.scenes),
        "splits": {s: sp.value for s, sp in sorted(corpus.split_assignment.items())},
        "log_tags": sorted(corpus.logs),
        "n_episodes": len(corpus.episodes),
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n")
    with open(directory / "episodes.jsonl", "w") as f:
        for e in corpus.episodes:
            f.write(json.dumps(e.to_json(), sort_keys=True) + "\n")
    logdir = directory / "logs"
    logdir.mkdir(exist_ok=True)
    for tag, logs in sorted(corpus.logs.items()):
        write_logs(logs, logdir / f"{tag}.jsonl")
    return directory


def load_corpus(directory: str | Path) -> Corpus:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    if manifest.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {manifest.get('schema_version')}")
    scenes = {sid: load_scene(directory / "scenes" / sid) for sid in manifest["scene_ids"]}
    episodes = read_episodes(directory / "episodes.jsonl")
    logs = {}
    for tag in manifest.get("log_tags", []):
        path = directory / "logs" / f"{tag}.jsonl"
        if path.exists():
            logs[tag] = read_logs(path)
    corpus = Corpus(
        scenes=scenes,
        episodes=episodes,
        logs=logs,
        split_assignment={s: Split(v) for s, v in manifest["splits"].items()},
    )
    corpus.validate()
    return corpus


def read_episodes(path: str | Path) -> list[Episode]:
    out = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                out.append(Episode.from_json(json.loads(line)))
    return out


def write_logs(logs: list[TrajectoryLog], path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for log in logs:
            f.write(json.dumps(log.to_json(), sort_keys=True) + "\n")


def append_log(log: TrajectoryLog, path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a") as f:
        f.write(json.dumps(log.to_json(), sort_keys=True) + "\n")


def read_logs(path: str | Path) -> list[TrajectoryLog]:
    out = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                out.append(TrajectoryLog.from_json(json.loads(line)))
    return out
