"""Coordinate frames, the 5D agent pose, and discrete flight kinematics.

Angles are degrees throughout the public API.  Yaw is measured from the
+x (east) axis, increasing counterclockwise, and is kept in ``[0, 360)``.
Because every turn is a whole multiple of 30 degrees, yaw never
accumulates floating-point drift: turn updates are exact modular
arithmetic, and headings for the twelve canonical yaws come from an
exact lookup table rather than ``cos``/``sin`` round trips.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import OutOfExtent

FORWARD_STEP_M = 5.0
TURN_STEP_DEG = 30.0
VERTICAL_STEP_M = 2.0
ALTITUDE_CEILING_M = 200.0

Point3 = tuple[float, float, float]


class Action(Enum):
    MOVE_FORWARD = "move-forward"
    TURN_LEFT = "turn-left"
    TURN_RIGHT = "turn-right"
    ASCEND = "ascend"
    DESCEND = "descend"
    STOP = "stop"

    @classmethod
    def from_wire(cls, name: str) -> "Action":
        """Parse the lowercase hyphenated wire name, e.g. ``"move-forward"``."""
        for a in cls:
            if a.value == name:
                return a
        raise ValueError(f"unknown action {name!r}")


MOTION_ACTIONS = (
    Action.MOVE_FORWARD,
    Action.TURN_LEFT,
    Action.TURN_RIGHT,
    Action.ASCEND,
    Action.DESCEND,
)

_SQRT3_2 = math.sqrt(3.0) / 2.0

# heading unit vectors for yaw = 0, 30, ..., 330 (exact where representable)
_HEADINGS = {
    0.0: (1.0, 0.0),
    30.0: (_SQRT3_2, 0.5),
    60.0: (0.5, _SQRT3_2),
    90.0: (0.0, 1.0),
    120.0: (-0.5, _SQRT3_2),
    150.0: (-_SQRT3_2, 0.5),
    180.0: (-1.0, 0.0),
    210.0: (-_SQRT3_2, -0.5),
    240.0: (-0.5, -_SQRT3_2),
    270.0: (0.0, -1.0),
    300.0: (0.5, -_SQRT3_2),
    330.0: (_SQRT3_2, -0.5),
}


def normalize_yaw(yaw: float) -> float:
    """Wrap ``yaw`` into ``[0, 360)`` degrees."""
    return yaw % 360.0


def heading_vector(yaw: float) -> tuple[float, float]:
    """Unit (dx, dy) for a heading of ``yaw`` degrees.

    Canonical 30-degree yaws use the exact table so that e.g. a forward
    move at yaw 90 translates by exactly (0, 5).
    """
    yaw = normalize_yaw(yaw)
    if yaw in _HEADINGS:
        return _HEADINGS[yaw]
    r = math.radians(yaw)
    return (math.cos(r), math.sin(r))


@dataclass(frozen=True)
class Pose:
    """5D agent state: position in meters plus camera pitch and heading yaw.

    Yaw is normalized to ``[0, 360)`` and pitch clamped to ``[-90, 90]``
    at construction.  Altitude is clamped by the kinematics, not here.
    """

    x: float
    y: float
    z: float
    pitch: float
    yaw: float

    def __post_init__(self):
        object.__setattr__(self, "yaw", normalize_yaw(self.yaw))
        object.__setattr__(self, "pitch", max(-90.0, min(90.0, self.pitch)))

    def horizontal_distance(self, p: Point3) -> float:
        return math.hypot(self.x - p[0], self.y - p[1])

    def to_json(self) -> dict:
        return {"x": self.x, "y": self.y, "z": self.z, "pitch": self.pitch, "yaw": self.yaw}

    @classmethod
    def from_json(cls, d: dict) -> "Pose":
        return cls(d["x"], d["y"], d["z"], d["pitch"], d["yaw"])


def apply_action(p: Pose, a: Action) -> Pose:
    """Apply one discrete action to a pose, clamping altitude to [0, 200].

    Forward motion is horizontal only: it follows the yaw heading and
    ignores pitch, which orients the camera.  ``STOP`` is the identity.
    """
    if a is Action.STOP:
        return p
    if a is Action.MOVE_FORWARD:
        dx, dy = heading_vector(p.yaw)
        return Pose(p.x + FORWARD_STEP_M * dx, p.y + FORWARD_STEP_M * dy, p.z, p.pitch, p.yaw)
    if a is Action.TURN_LEFT:
        return Pose(p.x, p.y, p.z, p.pitch, p.yaw + TURN_STEP_DEG)
    if a is Action.TURN_RIGHT:
        return Pose(p.x, p.y, p.z, p.pitch, p.yaw - TURN_STEP_DEG)
    if a is Action.ASCEND:
        return Pose(p.x, p.y, min(ALTITUDE_CEILING_M, p.z + VERTICAL_STEP_M), p.pitch, p.yaw)
    if a is Action.DESCEND:
        return Pose(p.x, p.y, max(0.0, p.z - VERTICAL_STEP_M), p.pitch, p.yaw)
    raise ValueError(f"unhandled action {a}")


def euclidean_distance(a: Pose | Point3, b: Point3) -> float:
    """3D Euclidean distance between a pose (or point) and a point."""
    if isinstance(a, Pose):
        ax, ay, az = a.x, a.y, a.z
    else:
        ax, ay, az = a
    return math.sqrt((ax - b[0]) ** 2 + (ay - b[1]) ** 2 + (az - b[2]) ** 2)


def bearing_deg(from_x: float, from_y: float, to_x: float, to_y: float) -> float:
    """Heading in degrees from one point toward another, in ``[0, 360)``."""
    return normalize_yaw(math.degrees(math.atan2(to_y - from_y, to_x - from_x)))


def yaw_error_deg(yaw: float, bearing: float) -> float:
    """Signed smallest rotation (degrees, in ``(-180, 180]``) from yaw to bearing."""
    d = (bearing - yaw) % 360.0
    if d > 180.0:
        d -= 360.0
    return d


@dataclass(frozen=True)
class MapTransform:
    """Affine bridge between world meters and 2D map units.

    The world origin maps to map ``(0, 0)``; the nominal geographic
    anchor (``origin_lat``/``origin_lon``) is carried for export only
    and takes no part in the arithmetic.
    """

    origin_lat: float
    origin_lon: float
    meters_per_map_unit: float
    map_extent: tuple[float, float]  # (width, height) in map units

    def __post_init__(self):
        if self.meters_per_map_unit <= 0:
            raise ValueError("meters_per_map_unit must be positive")

    @property
    def world_extent(self) -> tuple[float, float]:
        """Scene (width, height) in meters."""
        return (
            self.map_extent[0] * self.meters_per_map_unit,
            self.map_extent[1] * self.meters_per_map_unit,
        )

    def _check(self, x: float, y: float) -> None:
        w, h = self.world_extent
        if not (-0.1 * w <= x <= 1.1 * w and -0.1 * h <= y <= 1.1 * h):
            raise OutOfExtent(f"({x}, {y}) outside padded extent {w}x{h}")

    def world_to_map(self, x: float, y: float) -> tuple[float, float]:
        self._check(x, y)
        return (x / self.meters_per_map_unit, y / self.meters_per_map_unit)

    def map_to_world(self, u: float, v: float) -> tuple[float, float]:
        x = u * self.meters_per_map_unit
        y = v * self.meters_per_map_unit
        self._check(x, y)
        return (x, y)

    def to_json(self) -> dict:
        return {
            "origin_lat": self.origin_lat,
            "origin_lon": self.origin_lon,
            "meters_per_map_unit": self.meters_per_map_unit,
            "map_extent": list(self.map_extent),
        }

    @classmethod
    def from_json(cls, d: dict) -> "MapTransform":
        return cls(
            d["origin_lat"],
            d["origin_lon"],
            d["meters_per_map_unit"],
            (d["map_extent"][0], d["map_extent"][1]),
        )
