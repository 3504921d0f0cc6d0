"""Shared fixtures: hand-built flat scenes and a small generated corpus."""

from __future__ import annotations

import numpy as np
import pytest

from aeronav.geodesy import MapTransform
from aeronav.worldmodel import (
    Category,
    Landmark,
    Scene,
    SceneObject,
    generate_scene,
)


def make_flat_scene(
    extent: float = 600.0,
    objects: list[SceneObject] | None = None,
    landmarks: list[Landmark] | None = None,
    ground: float = 0.0,
    cell: float = 2.0,
    scene_id: str = "fixture",
) -> Scene:
    """A constant-height scene with caller-supplied content."""
    n = int(extent / cell) + 1
    hf = np.full((n, n), ground, dtype=np.float32)
    return Scene(
        id=scene_id,
        extent=(extent, extent),
        cell_size=cell,
        heightfield=hf,
        objects=objects or [],
        landmarks=landmarks or [],
        transform=MapTransform(52.2, 0.12, 1.0, (extent, extent)),
    )


def raise_block(scene: Scene, x0: float, y0: float, x1: float, y1: float,
                height: float) -> None:
    """Extrude a rectangular block into the heightfield in place."""
    c = scene.cell_size
    hf = scene.heightfield
    j0, j1 = int(round(x0 / c)), int(round(x1 / c))
    i0, i1 = int(round(y0 / c)), int(round(y1 / c))
    hf[i0:i1 + 1, j0:j1 + 1] = np.maximum(hf[i0:i1 + 1, j0:j1 + 1], height)


def rect_polygon(x0, y0, x1, y1):
    return [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]


SIDNEY = Landmark("Sidney Street", rect_polygon(200.0, 280.0, 400.0, 320.0), "street")
TRINITY = Landmark("Trinity College", rect_polygon(80.0, 80.0, 160.0, 140.0), "college")

RED_CAR = SceneObject(
    id="obj-car",
    category=Category.CAR,
    name_tokens=["red", "car"],
    center=(300.0, 340.0, 1.5),
    footprint=(298.0, 338.0, 302.0, 342.0),
    height=1.5,
)
GREY_BUILDING = SceneObject(
    id="obj-bldg",
    category=Category.BUILDING,
    name_tokens=["grey", "building"],
    center=(460.0, 300.0, 30.0),
    footprint=(450.0, 290.0, 470.0, 310.0),
    height=30.0,
)


@pytest.fixture()
def flat_scene() -> Scene:
    return make_flat_scene(
        objects=[RED_CAR, GREY_BUILDING],
        landmarks=[SIDNEY, TRINITY],
    )


@pytest.fixture(scope="session")
def gen_scene() -> Scene:
    return generate_scene(7)
