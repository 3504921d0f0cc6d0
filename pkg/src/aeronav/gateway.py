"""HTTP session service for piloting episodes from a browser.

Contract highlights:

* no response before submit ever carries goal coordinates, and when
  pose noise is on the client only ever sees the noisy observed pose;
* every mutation of a session is serialized through a per-session lock;
* render and semantic-map resources are addressed by step index and are
  immutable once written;
* rollback restores flight state but never un-explores the map.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Response
from pydantic import BaseModel

from . import render as rendermod
from .datastore import append_log, load_corpus
from .errors import NoLandmarkFound
from .geodesy import Action, Pose, euclidean_distance
from .gsm import (
    CHANNELS,
    DescriptionCues,
    GsmStack,
    export_gsm,
    extract_cues,
    rasterize_landmarks,
    update_detections,
    update_fov,
)
from .metrics import TrajectoryLog
from .simcore import (
    DEFAULT_FOV_DEG,
    DEFAULT_MAX_STEPS,
    Episode,
    NoiseSpec,
    SessionState,
    is_success,
    step,
)
from .worldmodel import Scene, landmarks_geojson

UNDO_LIMIT = 50
SESSION_LIMIT = 256


@dataclass
class GatewayConfig:
    noise: NoiseSpec = NoiseSpec()
    max_steps: int = DEFAULT_MAX_STEPS
    fov_deg: float = DEFAULT_FOV_DEG
    render_size: int = 224
    undo_limit: int = UNDO_LIMIT
    session_limit: int = SESSION_LIMIT
    log_path: Optional[Path] = None  # where submitted trajectories append


@dataclass
class _Snapshot:
    pose: Pose
    observed_pose: Pose
    step_count: int
    done: bool
    truncated: bool
    n_visited: int
    n_actions: int
    n_collisions: int


@dataclass
class SessionRecord:
    session_id: str
    episode: Episode
    scene: Scene
    state: SessionState
    gsm: GsmStack
    cues: DescriptionCues
    created_at: float
    undo_stack: list = field(default_factory=list)
    submitted: bool = False
    trajectory_id: Optional[str] = None
    lock: threading.Lock = field(default_factory=threading.Lock)
    renders: dict = field(default_factory=dict)       # (step, mode) -> png bytes
    gsm_snapshots: dict = field(default_factory=dict)  # step -> packed bits

    def snapshot(self) -> _Snapshot:
        s = self.state
        return _Snapshot(s.pose, s.observed_pose, s.step_count, s.done, s.truncated,
                         len(s.visited), len(s.actions), len(s.collisions))

    def restore(self, snap: _Snapshot) -> None:
        s = self.state
        s.pose = snap.pose
        s.observed_pose = snap.observed_pose
        s.step_count = snap.step_count
        s.done = snap.done
        s.truncated = snap.truncated
        del s.visited[snap.n_visited:]
        del s.actions[snap.n_actions:]
        del s.collisions[snap.n_collisions:]


class CreateSessionBody(BaseModel):
    scene_id: str
    episode_id: str = "random"


class ActionBody(BaseModel):
    action: str


def _state_payload(rec: SessionRecord) -> dict:
    # observed pose only: the true pose stays server-side under noise
    return {
        "pose": rec.state.observed_pose.to_json(),
        "step_count": rec.state.step_count,
        "done": rec.state.done,
    }


def make_app(
    corpus_dir: str | Path | None = None,
    config: GatewayConfig | None = None,
    scenes: dict[str, Scene] | None = None,
    episodes: list[Episode] | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    """Build the service around a corpus directory or in-memory data."""
    cfg = config or GatewayConfig()
    if corpus_dir is not None:
        corpus = load_corpus(corpus_dir)
        scenes = corpus.scenes
        episodes = corpus.episodes
        if cfg.log_path is None:
            cfg.log_path = Path(corpus_dir) / "logs" / "human.jsonl"
    if scenes is None or episodes is None:
        raise ValueError("need a corpus_dir or explicit scenes + episodes")

    episode_index = {e.id: e for e in episodes}
    by_scene: dict[str, list[Episode]] = {}
    for e in episodes:
        by_scene.setdefault(e.scene_id, []).append(e)

    sessions: dict[str, SessionRecord] = {}
    sessions_lock = threading.Lock()
    log_lock = threading.Lock()
    pick_rng = np.random.default_rng(secrets.randbits(63))

    app = FastAPI(title="aeronav gateway")

    def _get(session_id: str) -> SessionRecord:
        rec = sessions.get(session_id)
        if rec is None:
            raise HTTPException(404, "unknown session")
        return rec

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "sessions": len(sessions)}

    @app.get("/scenes/{scene_id}/map")
    def scene_map(scene_id: str):
        scene = scenes.get(scene_id)
        if scene is None:
            raise HTTPException(404, "unknown scene")
        return landmarks_geojson(scene)

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        scene = scenes.get(body.scene_id)
        if scene is None:
            raise HTTPException(404, "unknown scene")
        if body.episode_id == "random":
            pool = by_scene.get(body.scene_id, [])
            if not pool:
                raise HTTPException(404, "scene has no episodes")
            episode = pool[int(pick_rng.integers(len(pool)))]
        else:
            episode = episode_index.get(body.episode_id)
            if episode is None or episode.scene_id != body.scene_id:
                raise HTTPException(404, "unknown episode")
        with sessions_lock:
            if len(sessions) >= cfg.session_limit:
                raise HTTPException(429, "session limit reached")
            session_id = secrets.token_urlsafe(24)  # 192 bits
            state = SessionState.begin(episode.start_pose,
                                       rng=np.random.default_rng(secrets.randbits(63)))
            gsm = GsmStack.for_scene(scene)
            try:
                cues = extract_cues(episode.description, scene)
                gsm.landmarks[:] = rasterize_landmarks(scene, cues, gsm.resolution,
                                                       gsm.fov.shape)
            except NoLandmarkFound:
                cues = DescriptionCues([], [], [])
            update_fov(gsm, state.observed_pose, cfg.fov_deg)
            rec = SessionRecord(
                session_id=session_id,
                episode=episode,
                scene=scene,
                state=state,
                gsm=gsm,
                cues=cues,
                created_at=time.time(),
            )
            rec.gsm_snapshots[0] = np.packbits(export_gsm(gsm))
            sessions[session_id] = rec
        return {
            "session_id": session_id,
            "description": episode.description,
            "start_state": _state_payload(rec),
            "map_geojson_url": f"/scenes/{episode.scene_id}/map",
        }

    @app.post("/sessions/{session_id}/action")
    def post_action(session_id: str, body: ActionBody):
        rec = _get(session_id)
        try:
            action = Action.from_wire(body.action)
        except ValueError:
            raise HTTPException(400, f"unknown action {body.action!r}")
        with rec.lock:
            if rec.state.done:
                raise HTTPException(409, "session is done")
            rec.undo_stack.append(rec.snapshot())
            if len(rec.undo_stack) > cfg.undo_limit:
                rec.undo_stack.pop(0)
            _, obs = step(rec.state, rec.scene, action, noise=cfg.noise,
                          max_steps=cfg.max_steps, fov_deg=cfg.fov_deg)
            update_fov(rec.gsm, rec.state.observed_pose, cfg.fov_deg)
            update_detections(rec.gsm, obs, rec.scene, rec.cues)
            n = rec.state.step_count
            rec.gsm_snapshots[n] = np.packbits(export_gsm(rec.gsm))
        return {
            "state": _state_payload(rec),
            "render_urls": {
                mode: f"/sessions/{session_id}/render?mode={mode}&step={n}"
                for mode in ("topdown", "oblique")
            },
            "gsm_url": f"/sessions/{session_id}/gsm?step={n}",
            "done": rec.state.done,
        }

    @app.post("/sessions/{session_id}/rollback")
    def rollback(session_id: str):
        rec = _get(session_id)
        with rec.lock:
            if not rec.undo_stack:
                raise HTTPException(409, "nothing to roll back")
            rec.restore(rec.undo_stack.pop())
            # artifacts past the restored step would otherwise alias a
            # future step with a different pose
            n = rec.state.step_count
            rec.renders = {k: v for k, v in rec.renders.items() if k[0] <= n}
            rec.gsm_snapshots = {k: v for k, v in rec.gsm_snapshots.items() if k <= n}
        return {"state": _state_payload(rec)}

    @app.post("/sessions/{session_id}/submit")
    def submit(session_id: str):
        rec = _get(session_id)
        with rec.lock:
            if rec.submitted:
                raise HTTPException(409, "already submitted")
            rec.submitted = True
            rec.state.done = True
            goal = rec.episode.goal_center
            distance = euclidean_distance(rec.state.pose, goal)
            trajectory_id = f"traj-{rec.episode.id}-{secrets.token_hex(4)}"
            rec.trajectory_id = trajectory_id
            log = TrajectoryLog(
                episode_id=rec.episode.id,
                agent_tag="human",
                actions=list(rec.state.actions),
                poses=list(rec.state.visited),
                stopped=True,
                final_distance=distance,
                wall_time=time.time() - rec.created_at,
                collisions=list(rec.state.collisions),
            )
        if cfg.log_path is not None:
            with log_lock:
                append_log(log, cfg.log_path)
        return {
            "distance_to_goal": distance,
            "success": is_success(rec.state.pose, goal),
            "trajectory_id": trajectory_id,
        }

    @app.get("/sessions/{session_id}/render")
    def get_render(session_id: str, mode: str = Query("topdown"),
                   step_idx: int | None = Query(None, alias="step")):
        rec = _get(session_id)
        if mode not in ("topdown", "oblique"):
            raise HTTPException(400, "mode must be topdown or oblique")
        with rec.lock:
            n = rec.state.step_count if step_idx is None else step_idx
            if not (0 <= n <= rec.state.step_count):
                raise HTTPException(404, "no such step")
            key = (n, mode)
            if key not in rec.renders:
                pose = rec.state.visited[n]
                pitch = -90.0 if mode == "topdown" else -45.0
                cam = Pose(pose.x, pose.y, pose.z, pitch, pose.yaw)
                obs = rendermod.render(rec.scene, cam, fov_deg=cfg.fov_deg,
                                       rgb_size=cfg.render_size,
                                       depth_size=cfg.render_size)
                rec.renders[key] = rendermod.rgb_png_bytes(obs.rgb)
            data = rec.renders[key]
        return Response(content=data, media_type="image/png")

    @app.get("/sessions/{session_id}/gsm")
    def get_gsm(session_id: str, channel: str = Query("explored"),
                step_idx: int | None = Query(None, alias="step")):
        rec = _get(session_id)
        if channel not in CHANNELS:
            raise HTTPException(400, f"channel must be one of {CHANNELS}")
        with rec.lock:
            n = max(rec.gsm_snapshots) if step_idx is None else step_idx
            packed = rec.gsm_snapshots.get(n)
            if packed is None:
                raise HTTPException(404, "no such step")
        size = 224
        tensor = np.unpackbits(packed)[:len(CHANNELS) * size * size]
        tensor = tensor.reshape(len(CHANNELS), size, size)
        plane = tensor[CHANNELS.index(channel)]
        return Response(content=rendermod.mask_png_bytes(plane.astype(bool)),
                        media_type="image/png")

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
