"""Five-channel binary semantic map over the scene's 2D frame.

Channels, in fixed order: current field of view, explored area,
landmarks, potential goals, surrounding objects.  The native grid
covers the whole scene at 2 m per cell; exports resample to 224x224.
The explored, potential-goal, and surroundings channels only ever gain
cells during an episode; the landmark channel is computed once from the
description before flying and never changes.
"""

from __future__ import annotations

import io
import json
import math
import struct
from dataclasses import dataclass, field

import numpy as np
from matplotlib.path import Path as MplPath

from .errors import NoLandmarkFound
from .geodesy import Pose
from .simcore import Observation
from .worldmodel import CATEGORY_OF_WORD, Scene, STOPWORDS

NATIVE_RESOLUTION_M = 2.0
EXPORT_SIZE = 224
CHANNELS = ("fov", "explored", "landmarks", "potential_goals", "surroundings")
GSM_MAGIC = b"AGSM"


@dataclass(frozen=True)
class DescriptionCues:
    landmark_names: list[str]
    goal_phrases: list[list[str]]
    surrounding_phrases: list[list[str]]


def _word_stream(text: str) -> list[str]:
    out = []
    for raw in text.lower().replace(",", " ").replace(".", " ").split():
        w = raw.strip("()'\"!?;:")
        if w:
            out.append(w)
    return out


def extract_cues(description: str, scene: Scene) -> DescriptionCues:
    """Deterministic cue extraction from a goal description.

    Landmark names are matched longest-first as contiguous,
    case-insensitive token runs.  Noun phrases ending in a category
    word (building/car/parking/...) become goal or surrounding phrases;
    the first one names the goal, the rest its surroundings.
    """
    words = _word_stream(description)
    lm_tokens = {l.name: [w.lower() for w in l.name.split()] for l in scene.landmarks}
    consumed = [False] * len(words)
    found: list[tuple[int, str]] = []
    for name, toks in sorted(lm_tokens.items(), key=lambda kv: -len(kv[1])):
        n = len(toks)
        for i in range(len(words) - n + 1):
            if any(consumed[i:i + n]):
                continue
            if words[i:i + n] == toks:
                consumed[i:i + n] = [True] * n
                found.append((i, name))
                break
    found.sort()
    landmark_names = [name for _, name in found]

    goal_phrases: list[list[str]] = []
    surrounding_phrases: list[list[str]] = []
    for i, w in enumerate(words):
        if consumed[i] or w not in CATEGORY_OF_WORD:
            continue
        phrase = [w]
        j = i - 1
        while j >= 0 and len(phrase) < 3:
            prev = words[j]
            if consumed[j] or prev in STOPWORDS or prev in CATEGORY_OF_WORD:
                break
            phrase.insert(0, prev)
            j -= 1
        if not goal_phrases:
            goal_phrases.append(phrase)
        else:
            surrounding_phrases.append(phrase)

    if not landmark_names:
        raise NoLandmarkFound(f"description names no scene landmark: {description!r}")
    return DescriptionCues(landmark_names, goal_phrases, surrounding_phrases)


@dataclass
class GsmStack:
    fov: np.ndarray
    explored: np.ndarray
    landmarks: np.ndarray
    potential_goals: np.ndarray
    surroundings: np.ndarray
    resolution: float
    extent: tuple[float, float]

    @classmethod
    def for_scene(cls, scene: Scene, resolution: float = NATIVE_RESOLUTION_M) -> "GsmStack":
        w, h = scene.extent
        shape = (int(math.ceil(h / resolution)), int(math.ceil(w / resolution)))
        z = lambda: np.zeros(shape, dtype=bool)
        return cls(z(), z(), z(), z(), z(), resolution, (w, h))

    def channel(self, name: str) -> np.ndarray:
        if name not in CHANNELS:
            raise KeyError(name)
        return getattr(self, name)

    def zero_channel(self, name: str) -> None:
        """Ablation hook: blank one channel in place."""
        self.channel(name)[:] = False

    def stacked(self) -> np.ndarray:
        return np.stack([self.channel(c) for c in CHANNELS])

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        rows, cols = self.fov.shape
        return (
            min(rows - 1, max(0, int(y / self.resolution))),
            min(cols - 1, max(0, int(x / self.resolution))),
        )


def update_fov(g: GsmStack, observed_pose: Pose, fov_deg: float = 90.0) -> GsmStack:
    """Mark the downward square view; fold it into the explored mask.

    The square's side is ``2 * z * tan(fov/2)``; cells whose centers
    fall inside are set.  The cell under the agent is always set, so
    the mask is never empty.
    """
    res = g.resolution
    side = 2.0 * observed_pose.z * math.tan(math.radians(fov_deg) / 2.0)
    rows, cols = g.fov.shape
    x, y = observed_pose.x, observed_pose.y
    i0 = max(0, int(math.ceil((y - side / 2) / res - 0.5)))
    i1 = min(rows - 1, int(math.floor((y + side / 2) / res - 0.5)))
    j0 = max(0, int(math.ceil((x - side / 2) / res - 0.5)))
    j1 = min(cols - 1, int(math.floor((x + side / 2) / res - 0.5)))
    g.fov[:] = False
    if i1 >= i0 and j1 >= j0:
        g.fov[i0:i1 + 1, j0:j1 + 1] = True
    r, c = g.cell_of(x, y)
    g.fov[r, c] = True
    g.explored |= g.fov
    return g


def rasterize_landmarks(
    scene: Scene,
    cues: DescriptionCues,
    resolution: float = NATIVE_RESOLUTION_M,
    shape: tuple[int, int] | None = None,
) -> np.ndarray:
    """Union of polygon fills for every cue-named, currently-visible landmark."""
    w, h = scene.extent
    if shape is None:
        shape = (int(math.ceil(h / resolution)), int(math.ceil(w / resolution)))
    grid = np.zeros(shape, dtype=bool)
    visible = {l.name: l for l in scene.visible_landmarks()}
    for name in cues.landmark_names:
        l = visible.get(name)
        if l is None:
            continue
        xs = [p[0] for p in l.polygon]
        ys = [p[1] for p in l.polygon]
        j0 = max(0, int(min(xs) / resolution) - 1)
        j1 = min(shape[1] - 1, int(max(xs) / resolution) + 1)
        i0 = max(0, int(min(ys) / resolution) - 1)
        i1 = min(shape[0] - 1, int(max(ys) / resolution) + 1)
        if j1 < j0 or i1 < i0:
            continue
        cx = (np.arange(j0, j1 + 1) + 0.5) * resolution
        cy = (np.arange(i0, i1 + 1) + 0.5) * resolution
        gx, gy = np.meshgrid(cx, cy)
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        path = MplPath(np.array(l.polygon))
        # test both signed offsets so boundary cells land inside for
        # either polygon winding
        inside = path.contains_points(pts, radius=1e-6) | path.contains_points(pts, radius=-1e-6)
        grid[i0:i1 + 1, j0:j1 + 1] |= inside.reshape(gy.shape)
    return grid


def phrase_matches(phrase: list[str], name_tokens: list[str]) -> bool:
    """A phrase matches an object when all its words appear in the object's tokens."""
    return set(phrase) <= set(name_tokens)


def update_detections(
    g: GsmStack,
    obs: Observation,
    scene: Scene,
    cues: DescriptionCues,
) -> GsmStack:
    """Mark footprints of visible objects that match the description's phrases.

    Marks persist for the whole episode; a later frame never erases an
    earlier detection.
    """
    if not obs.visible_objects:
        return g
    index = {o.id: o for o in scene.objects}
    res = g.resolution
    rows, cols = g.fov.shape
    for oid, _box in obs.visible_objects:
        o = index.get(oid)
        if o is None:
            continue
        goal_hit = any(phrase_matches(p, o.name_tokens) for p in cues.goal_phrases)
        surr_hit = any(phrase_matches(p, o.name_tokens) for p in cues.surrounding_phrases)
        if not (goal_hit or surr_hit):
            continue
        x0, y0, x1, y1 = o.footprint
        j0 = max(0, int(math.ceil(x0 / res - 0.5)))
        j1 = min(cols - 1, int(math.floor(x1 / res - 0.5)))
        i0 = max(0, int(math.ceil(y0 / res - 0.5)))
        i1 = min(rows - 1, int(math.floor(y1 / res - 0.5)))
        r, c = g.cell_of(o.center[0], o.center[1])
        if goal_hit:
            if i1 >= i0 and j1 >= j0:
                g.potential_goals[i0:i1 + 1, j0:j1 + 1] = True
            g.potential_goals[r, c] = True
        if surr_hit:
            if i1 >= i0 and j1 >= j0:
                g.surroundings[i0:i1 + 1, j0:j1 + 1] = True
            g.surroundings[r, c] = True
    return g


def export_gsm(g: GsmStack, size: int = EXPORT_SIZE) -> np.ndarray:
    """Resample the stack to ``(5, size, size)`` uint8 in {0, 1}.

    Downsampling max-pools (any set native cell survives); upsampling
    is nearest-neighbor.  A native grid already at the target size is
    passed through unchanged.
    """
    out = np.zeros((len(CHANNELS), size, size), dtype=np.uint8)
    for k, name in enumerate(CHANNELS):
        out[k] = _resample(g.channel(name), size)
    return out


def _resample(grid: np.ndarray, size: int) -> np.ndarray:
    rows, cols = grid.shape
    if (rows, cols) == (size, size):
        return grid.astype(np.uint8)
    if rows >= size and cols >= size:
        ri = (np.arange(rows) * size) // rows
        ci = (np.arange(cols) * size) // cols
        acc = np.zeros((size, size), dtype=np.uint8)
        np.maximum.at(acc, (ri[:, None], ci[None, :]), grid.astype(np.uint8))
        return acc
    ri = (np.arange(size) * rows) // size
    ci = (np.arange(size) * cols) // size
    return grid[ri[:, None], ci[None, :]].astype(np.uint8)


def save_gsm_bytes(g: GsmStack) -> bytes:
    """Stacked tensor file: magic, JSON header, then packed uint8 planes."""
    tensor = g.stacked().astype(np.uint8)
    header = json.dumps({
        "channels": list(CHANNELS),
        "resolution": g.resolution,
        "extent": list(g.extent),
        "shape": list(tensor.shape),
    }, sort_keys=True).encode()
    return GSM_MAGIC + struct.pack("<I", len(header)) + header + tensor.tobytes(order="C")


def load_gsm_bytes(raw: bytes) -> GsmStack:
    if raw[:4] != GSM_MAGIC:
        raise ValueError("bad gsm magic")
    (hlen,) = struct.unpack("<I", raw[4:8])
    header = json.loads(raw[8:8 + hlen].decode())
    shape = tuple(header["shape"])
    tensor = np.frombuffer(raw[8 + hlen:], dtype=np.uint8).reshape(shape).astype(bool)
    g = GsmStack(
        tensor[0].copy(), tensor[1].copy(), tensor[2].copy(),
        tensor[3].copy(), tensor[4].copy(),
        header["resolution"], tuple(header["extent"]),
    )
    return g


def mask_centroid_world(mask: np.ndarray, resolution: float) -> tuple[float, float] | None:
    """World (x, y) of the mask's set-cell centroid, or None if empty."""
    idx = np.argwhere(mask)
    if idx.size == 0:
        return None
    r = idx[:, 0].mean()
    c = idx[:, 1].mean()
    return ((c + 0.5) * resolution, (r + 0.5) * resolution)


def nearest_set_cell_world(
    mask: np.ndarray,
    resolution: float,
    x: float,
    y: float,
    radius_m: float | None = None,
) -> tuple[float, float] | None:
    """World center of the set cell nearest to (x, y), optionally windowed."""
    rows, cols = mask.shape
    if radius_m is None:
        view = mask
        r_off = c_off = 0
    else:
        rad = int(math.ceil(radius_m / resolution))
        r = min(rows - 1, max(0, int(y / resolution)))
        c = min(cols - 1, max(0, int(x / resolution)))
        r_off = max(0, r - rad)
        c_off = max(0, c - rad)
        view = mask[r_off:min(rows, r + rad + 1), c_off:min(cols, c + rad + 1)]
    idx = np.argwhere(view)
    if idx.size == 0:
        return None
    cx = (idx[:, 1] + c_off + 0.5) * resolution
    cy = (idx[:, 0] + r_off + 0.5) * resolution
    d2 = (cx - x) ** 2 + (cy - y) ** 2
    k = int(np.argmin(d2))
    return (float(cx[k]), float(cy[k]))
