"""Synthetic city scenes.

A scene is a heightfield terrain (ground plus extruded buildings),
a set of annotated objects, and a store of named landmark polygons that
plays the role of a public map service.  Scenes are generated from a
single seeded PCG64 stream, so a given seed produces byte-identical
files on every platform.

File format: ``scene.json`` (metadata, objects, landmarks, transform)
plus ``scene.hgt`` (little-endian float32 grid with a small binary
header), kept separate so the JSON stays diffable.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import Ambiguous, InvalidParams, NotFound, OutOfExtent
from .geodesy import MapTransform, Point3

HEIGHTFIELD_CELL_M = 2.0
HEIGHTFIELD_MAGIC = b"AHGT"

STOPWORDS = {"the", "a", "an", "of", "to", "at", "on", "in", "by", "near", "and", "with", "is"}


class Category(Enum):
    BUILDING = "building"
    CAR = "car"
    GROUND = "ground"
    PARKING_LOT = "parking_lot"
    OTHER = "other"


# goal-object category mix the generator targets
CATEGORY_PROBS = {
    Category.BUILDING: 0.483,
    Category.CAR: 0.407,
    Category.GROUND: 0.074,
    Category.PARKING_LOT: 0.036,
}

COLORS = [
    "red", "blue", "green", "white", "black", "grey",
    "yellow", "orange", "brown", "silver", "beige", "purple",
]

KIND_WORDS = {
    Category.BUILDING: ["building", "tower", "warehouse", "office"],
    Category.CAR: ["car", "van", "truck"],
    Category.GROUND: ["field", "lawn", "ground"],
    Category.PARKING_LOT: ["parking"],
}

# every kind word maps back to its category for description parsing
CATEGORY_OF_WORD = {w: c for c, ws in KIND_WORDS.items() for w in ws}
CATEGORY_OF_WORD["lot"] = Category.PARKING_LOT

_STREET_FIRST = [
    "Sidney", "Mill", "Station", "Bridge", "Castle", "Regent",
    "Victoria", "Albion", "Harbor", "Orchard", "Maple", "Elm",
    "Birch", "Granite", "Willow", "Foundry",
]
_STREET_KIND = ["Street", "Avenue", "Road", "Lane"]
_PLACE_FIRST = [
    "Trinity", "Kings", "Newton", "Halifax", "Brunswick", "Pemberton",
    "Ashford", "Clarendon", "Montrose", "Whitfield", "Eastgate", "Larkspur",
]
_PLACE_KIND = ["College", "Hall", "Park", "Market", "Green", "Court"]


@dataclass(frozen=True)
class Landmark:
    name: str
    polygon: list[tuple[float, float]]  # map-frame vertices, simple polygon
    kind: str

    def centroid(self) -> tuple[float, float]:
        xs = [p[0] for p in self.polygon]
        ys = [p[1] for p in self.polygon]
        return (sum(xs) / len(xs), sum(ys) / len(ys))

    def to_json(self) -> dict:
        return {"name": self.name, "polygon": [list(p) for p in self.polygon], "kind": self.kind}

    @classmethod
    def from_json(cls, d: dict) -> "Landmark":
        return cls(d["name"], [(p[0], p[1]) for p in d["polygon"]], d["kind"])


@dataclass(frozen=True)
class SceneObject:
    id: str
    category: Category
    name_tokens: list[str]
    center: Point3  # (x, y, top elevation)
    footprint: tuple[float, float, float, float]  # xmin, ymin, xmax, ymax in meters
    height: float

    def contains_xy(self, x: float, y: float) -> bool:
        x0, y0, x1, y1 = self.footprint
        return x0 <= x <= x1 and y0 <= y <= y1

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "category": self.category.value,
            "name_tokens": list(self.name_tokens),
            "center": list(self.center),
            "footprint": list(self.footprint),
            "height": self.height,
        }

    @classmethod
    def from_json(cls, d: dict) -> "SceneObject":
        return cls(
            d["id"],
            Category(d["category"]),
            list(d["name_tokens"]),
            tuple(d["center"]),
            tuple(d["footprint"]),
            d["height"],
        )


@dataclass
class Scene:
    id: str
    extent: tuple[float, float]  # meters
    cell_size: float
    heightfield: np.ndarray  # (ny, nx) float32 node grid, row v=0 at y=0
    objects: list[SceneObject]
    landmarks: list[Landmark]
    transform: MapTransform
    water_level: float = 0.0  # flood scenarios; 0 means dry
    hidden_object_ids: frozenset = field(default_factory=frozenset)
    hidden_landmark_names: frozenset = field(default_factory=frozenset)

    def object_by_id(self, oid: str) -> SceneObject:
        for o in self.objects:
            if o.id == oid:
                return o
        raise NotFound(f"object {oid!r} not in scene {self.id}")

    def visible_landmarks(self) -> list[Landmark]:
        return [l for l in self.landmarks if l.name not in self.hidden_landmark_names]

    def detectable_objects(self) -> list[SceneObject]:
        return [o for o in self.objects if o.id not in self.hidden_object_ids]

    def validate(self) -> None:
        hf = self.heightfield
        if hf.min() < 0 or hf.max() > 150.0:
            raise ValueError("heightfield outside [0, 150] m")
        w, h = self.extent
        names = set()
        for l in self.landmarks:
            if not l.name or l.name in names:
                raise ValueError(f"duplicate/empty landmark name {l.name!r}")
            names.add(l.name)
            if polygon_area(l.polygon) <= 0:
                raise ValueError(f"landmark {l.name!r} has nonpositive area")
        ids = set()
        for o in self.objects:
            if o.id in ids:
                raise ValueError(f"duplicate object id {o.id}")
            ids.add(o.id)
            x0, y0, x1, y1 = o.footprint
            if not (0 <= x0 <= x1 <= w and 0 <= y0 <= y1 <= h):
                raise ValueError(f"object {o.id} footprint outside extent")


def polygon_area(poly: list[tuple[float, float]]) -> float:
    """Absolute shoelace area."""
    s = 0.0
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return abs(s) / 2.0


def point_in_landmark(l: Landmark, u: float, v: float) -> bool:
    """Even-odd containment test; points on the boundary count as inside."""
    poly = l.polygon
    n = len(poly)
    eps = 1e-9
    inside = False
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        # boundary check: point within eps of the segment
        dx, dy = x1 - x0, y1 - y0
        seg2 = dx * dx + dy * dy
        if seg2 > 0:
            t = max(0.0, min(1.0, ((u - x0) * dx + (v - y0) * dy) / seg2))
        else:
            t = 0.0
        px, py = x0 + t * dx, y0 + t * dy
        if (u - px) ** 2 + (v - py) ** 2 <= eps * eps:
            return True
        if (y0 > v) != (y1 > v):
            xint = x0 + (v - y0) * dx / dy
            if u < xint:
                inside = not inside
    return inside


def landmark_distance(l: Landmark, u: float, v: float) -> float:
    """Distance from a map point to the landmark polygon (0 inside)."""
    if point_in_landmark(l, u, v):
        return 0.0
    best = math.inf
    poly = l.polygon
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        dx, dy = x1 - x0, y1 - y0
        seg2 = dx * dx + dy * dy
        t = 0.0 if seg2 == 0 else max(0.0, min(1.0, ((u - x0) * dx + (v - y0) * dy) / seg2))
        best = min(best, math.hypot(u - (x0 + t * dx), v - (y0 + t * dy)))
    return best


def terrain_height(s: Scene, x: float, y: float) -> float:
    """Bilinear terrain sample at a world point."""
    w, h = s.extent
    if not (0 <= x <= w and 0 <= y <= h):
        raise OutOfExtent(f"({x}, {y}) outside extent {w}x{h}")
    hf = s.heightfield
    ny, nx = hf.shape
    cell = s.cell_size
    gx = min(max(x / cell, 0.0), nx - 1 - 1e-9)
    gy = min(max(y / cell, 0.0), ny - 1 - 1e-9)
    ix, iy = int(gx), int(gy)
    fx, fy = gx - ix, gy - iy
    return float(hf[iy, ix] * (1 - fx) * (1 - fy) + hf[iy, ix + 1] * fx * (1 - fy)
                 + hf[iy + 1, ix] * (1 - fx) * fy + hf[iy + 1, ix + 1] * fx * fy)


def _sample_bilinear(hf: np.ndarray, cell: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    ny, nx = hf.shape
    gx = np.clip(x / cell, 0, nx - 1 - 1e-9)
    gy = np.clip(y / cell, 0, ny - 1 - 1e-9)
    ix = gx.astype(np.int64)
    iy = gy.astype(np.int64)
    fx = gx - ix
    fy = gy - iy
    h00 = hf[iy, ix]
    h10 = hf[iy, ix + 1]
    h01 = hf[iy + 1, ix]
    h11 = hf[iy + 1, ix + 1]
    return (h00 * (1 - fx) * (1 - fy) + h10 * fx * (1 - fy)
            + h01 * (1 - fx) * fy + h11 * fx * fy)


def surface_height(s: Scene, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorized renderable surface: terrain, or the water plane if flooded."""
    h = _sample_bilinear(s.heightfield, s.cell_size, np.asarray(x, float), np.asarray(y, float))
    if s.water_level > 0:
        h = np.maximum(h, s.water_level)
    return h


# --------------------------------------------------------------------------
# landmark lookup


def _tokens(text: str) -> list[str]:
    out = []
    for raw in text.lower().replace(",", " ").replace(".", " ").split():
        w = raw.strip("()'\"!?;:")
        if w and w not in STOPWORDS:
            out.append(w)
    return out


def landmark_segment(s: Scene, name: str) -> Landmark:
    """Resolve a landmark by exact name, then by case-insensitive token overlap."""
    for l in s.landmarks:
        if l.name == name:
            return l
    query = set(_tokens(name))
    best: list[Landmark] = []
    best_score = 0
    for l in s.landmarks:
        score = len(query & set(_tokens(l.name)))
        if score > best_score:
            best, best_score = [l], score
        elif score == best_score and score > 0:
            best.append(l)
    if best_score == 0:
        raise NotFound(f"no landmark matches {name!r}")
    if len(best) > 1:
        raise Ambiguous(f"{name!r} matches {[l.name for l in best]}")
    return best[0]


# --------------------------------------------------------------------------
# generation


@dataclass
class GeneratorParams:
    extent: float = 1000.0  # square side, meters
    n_objects: int = 300
    n_landmarks: int = 8
    cell_size: float = HEIGHTFIELD_CELL_M
    max_building_height: float = 60.0
    origin_lat: float = 52.2
    origin_lon: float = 0.12


def generate_scene(seed: int, params: GeneratorParams | None = None) -> Scene:
    params = params or GeneratorParams()
    if params.extent < 500.0:
        raise InvalidParams("extent must be at least 500 m per side")
    if params.n_objects < 50:
        raise InvalidParams("need at least 50 objects")
    if params.n_landmarks < 5:
        raise InvalidParams("need at least 5 landmarks")

    rng = np.random.default_rng(seed)
    w = h = float(params.extent)
    cell = params.cell_size
    nx = int(round(w / cell)) + 1
    ny = int(round(h / cell)) + 1

    # gently undulating ground, strictly nonnegative
    xs = np.arange(nx) * cell
    ys = np.arange(ny) * cell
    gx, gy = np.meshgrid(xs, ys)
    ground = np.full((ny, nx), 2.0)
    for _ in range(3):
        kx, ky = rng.uniform(0.002, 0.008, size=2)
        px, py = rng.uniform(0, 2 * math.pi, size=2)
        amp = rng.uniform(0.3, 0.8)
        ground += amp * np.sin(kx * gx + px) * np.sin(ky * gy + py)
    ground = np.clip(ground, 0.0, 4.0)

    margin = 25.0
    cats = rng.choice(
        [c.value for c in CATEGORY_PROBS],
        size=params.n_objects,
        p=list(CATEGORY_PROBS.values()),
    )
    objects: list[SceneObject] = []
    hf = ground.astype(np.float64)
    for i, cv in enumerate(cats):
        cat = Category(cv)
        if cat is Category.BUILDING:
            sx = rng.uniform(12, 40)
            sy = rng.uniform(12, 40)
            height = rng.uniform(10, params.max_building_height)
        elif cat is Category.CAR:
            sx, sy = (2.2, 5.0) if rng.random() < 0.5 else (5.0, 2.2)
            height = rng.uniform(1.5, 2.2)
        elif cat is Category.GROUND:
            sx = rng.uniform(10, 30)
            sy = rng.uniform(10, 30)
            height = 0.0
        else:  # parking lot
            sx = rng.uniform(20, 50)
            sy = rng.uniform(20, 50)
            height = 0.0
        cx = rng.uniform(margin + sx / 2, w - margin - sx / 2)
        cy = rng.uniform(margin + sy / 2, h - margin - sy / 2)
        fp = (cx - sx / 2, cy - sy / 2, cx + sx / 2, cy + sy / 2)
        color = COLORS[int(rng.integers(len(COLORS)))]
        kind = KIND_WORDS[cat][int(rng.integers(len(KIND_WORDS[cat])))]
        if cat is Category.BUILDING:
            i0 = max(0, int(math.floor(fp[0] / cell)))
            i1 = min(nx - 1, int(math.ceil(fp[2] / cell)))
            j0 = max(0, int(math.floor(fp[1] / cell)))
            j1 = min(ny - 1, int(math.ceil(fp[3] / cell)))
            block = ground[j0:j1 + 1, i0:i1 + 1] + height
            hf[j0:j1 + 1, i0:i1 + 1] = np.maximum(hf[j0:j1 + 1, i0:i1 + 1], block)
        gz = float(_sample_bilinear(ground, cell, np.array([cx]), np.array([cy]))[0])
        objects.append(
            SceneObject(
                id=f"obj-{i:04d}",
                category=cat,
                name_tokens=[color, kind],
                center=(round(cx, 6), round(cy, 6), round(gz + height, 6)),
                footprint=tuple(round(v, 6) for v in fp),
                height=round(float(height), 6),
            )
        )

    landmarks = _generate_landmarks(rng, w, h, params.n_landmarks)

    transform = MapTransform(params.origin_lat, params.origin_lon, 1.0, (w, h))
    scene = Scene(
        id=f"scene-{seed:05d}",
        extent=(w, h),
        cell_size=cell,
        heightfield=np.round(hf, 3).astype(np.float32),
        objects=objects,
        landmarks=landmarks,
        transform=transform,
    )
    scene.validate()
    return scene


def _generate_landmarks(rng, w: float, h: float, n: int) -> list[Landmark]:
    landmarks: list[Landmark] = []
    used = set()
    n_streets = max(2, n // 2)
    firsts = list(_STREET_FIRST)
    rng.shuffle(firsts)
    for k in range(n_streets):
        name = f"{firsts[k % len(firsts)]} {_STREET_KIND[int(rng.integers(4))]}"
        if name in used:
            name = f"{name} {k}"
        used.add(name)
        width = rng.uniform(8, 14)
        length = rng.uniform(0.55, 0.85) * min(w, h)
        if rng.random() < 0.5:  # east-west ribbon
            y0 = rng.uniform(40, h - 40 - width)
            x0 = rng.uniform(20, w - 20 - length)
            poly = [(x0, y0), (x0 + length, y0), (x0 + length, y0 + width), (x0, y0 + width)]
        else:
            x0 = rng.uniform(40, w - 40 - width)
            y0 = rng.uniform(20, h - 20 - length)
            poly = [(x0, y0), (x0 + width, y0), (x0 + width, y0 + length), (x0, y0 + length)]
        landmarks.append(Landmark(name, [(round(a, 6), round(b, 6)) for a, b in poly], "street"))
    places = list(_PLACE_FIRST)
    rng.shuffle(places)
    for k in range(n - n_streets):
        kind = _PLACE_KIND[int(rng.integers(len(_PLACE_KIND)))]
        name = f"{places[k % len(places)]} {kind}"
        if name in used:
            name = f"{name} {k}"
        used.add(name)
        sx = rng.uniform(40, 100)
        sy = rng.uniform(40, 100)
        cx = rng.uniform(40 + sx / 2, w - 40 - sx / 2)
        cy = rng.uniform(40 + sy / 2, h - 40 - sy / 2)
        poly = [
            (cx - sx / 2, cy - sy / 2), (cx + sx / 2, cy - sy / 2),
            (cx + sx / 2, cy + sy / 2), (cx - sx / 2, cy + sy / 2),
        ]
        landmarks.append(
            Landmark(name, [(round(a, 6), round(b, 6)) for a, b in poly], kind.lower())
        )
    return landmarks


# --------------------------------------------------------------------------
# file I/O


def scene_to_json(s: Scene) -> dict:
    return {
        "schema_version": 1,
        "id": s.id,
        "extent": list(s.extent),
        "cell_size": s.cell_size,
        "objects": [o.to_json() for o in s.objects],
        "landmarks": [l.to_json() for l in s.landmarks],
        "transform": s.transform.to_json(),
    }


def scene_from_json(d: dict, heightfield: np.ndarray) -> Scene:
    return Scene(
        id=d["id"],
        extent=(d["extent"][0], d["extent"][1]),
        cell_size=d["cell_size"],
        heightfield=heightfield,
        objects=[SceneObject.from_json(o) for o in d["objects"]],
        landmarks=[Landmark.from_json(l) for l in d["landmarks"]],
        transform=MapTransform.from_json(d["transform"]),
    )


def save_scene(s: Scene, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "scene.json").write_text(
        json.dumps(scene_to_json(s), sort_keys=True, indent=1) + "\n"
    )
    ny, nx = s.heightfield.shape
    header = HEIGHTFIELD_MAGIC + struct.pack("<IIf", nx, ny, s.cell_size)
    grid = s.heightfield.astype("<f4").tobytes(order="C")
    (directory / "scene.hgt").write_bytes(header + grid)
    return directory


def load_scene(directory: str | Path) -> Scene:
    directory = Path(directory)
    meta = json.loads((directory / "scene.json").read_text())
    raw = (directory / "scene.hgt").read_bytes()
    if raw[:4] != HEIGHTFIELD_MAGIC:
        raise ValueError(f"{directory}/scene.hgt: bad magic")
    nx, ny, cell = struct.unpack("<IIf", raw[4:16])
    hf = np.frombuffer(raw[16:], dtype="<f4").reshape(ny, nx).copy()
    scene = scene_from_json(meta, hf)
    if abs(scene.cell_size - cell) > 1e-6:
        raise ValueError("cell size mismatch between scene.json and scene.hgt")
    return scene


def landmarks_geojson(s: Scene) -> dict:
    """Landmark store as a GeoJSON FeatureCollection in map-frame coordinates."""
    features = []
    for l in s.visible_landmarks():
        ring = [list(p) for p in l.polygon] + [list(l.polygon[0])]
        features.append({
            "type": "Feature",
            "properties": {"name": l.name, "kind": l.kind},
            "geometry": {"type": "Polygon", "coordinates": [ring]},
        })
    return {"type": "FeatureCollection", "features": features}
