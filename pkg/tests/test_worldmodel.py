"""Scene model, generator determinism, landmark lookup, terrain sampling."""

import filecmp
import math

import numpy as np
import pytest

from aeronav.errors import Ambiguous, InvalidParams, NotFound, OutOfExtent
from aeronav.worldmodel import (
    Category,
    GeneratorParams,
    Landmark,
    generate_scene,
    landmark_distance,
    landmark_segment,
    landmarks_geojson,
    load_scene,
    point_in_landmark,
    polygon_area,
    save_scene,
    terrain_height,
)
from conftest import SIDNEY, make_flat_scene, rect_polygon


def test_generate_deterministic_bytes(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    save_scene(generate_scene(7), a)
    save_scene(generate_scene(7), b)
    for name in ("scene.json", "scene.hgt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_different_seeds_differ(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    save_scene(generate_scene(7), a)
    save_scene(generate_scene(8), b)
    assert not filecmp.cmp(a / "scene.json", b / "scene.json", shallow=False)


def test_category_mix_large():
    s = generate_scene(3, GeneratorParams(n_objects=1000))
    counts = {c: 0 for c in Category}
    for o in s.objects:
        counts[o.category] += 1
    n = len(s.objects)
    expected = {Category.BUILDING: 48.3, Category.CAR: 40.7,
                Category.GROUND: 7.4, Category.PARKING_LOT: 3.6}
    for cat, pct in expected.items():
        assert abs(100.0 * counts[cat] / n - pct) <= 5.0


def test_generator_minimums():
    with pytest.raises(InvalidParams):
        generate_scene(1, GeneratorParams(extent=400))
    with pytest.raises(InvalidParams):
        generate_scene(1, GeneratorParams(n_objects=10))
    with pytest.raises(InvalidParams):
        generate_scene(1, GeneratorParams(n_landmarks=2))


def test_scene_invariants(gen_scene):
    s = gen_scene
    s.validate()
    assert s.heightfield.min() >= 0 and s.heightfield.max() <= 150.0
    assert len(s.landmarks) >= 5
    for o in s.objects:
        x0, y0, x1, y1 = o.footprint
        assert x0 <= o.center[0] <= x1 and y0 <= o.center[1] <= y1


def test_scene_round_trip_bytes(tmp_path, gen_scene):
    a = tmp_path / "a"
    b = tmp_path / "b"
    save_scene(gen_scene, a)
    save_scene(load_scene(a), b)
    for name in ("scene.json", "scene.hgt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


# -- landmark lookup -------------------------------------------------------


def test_landmark_exact(flat_scene):
    assert landmark_segment(flat_scene, "Sidney Street").name == "Sidney Street"


def test_landmark_token_overlap(flat_scene):
    assert landmark_segment(flat_scene, "the sidney street").name == "Sidney Street"


def test_landmark_not_found(flat_scene):
    with pytest.raises(NotFound):
        landmark_segment(flat_scene, "Nonexistent Plaza")


def test_landmark_ambiguous():
    s = make_flat_scene(landmarks=[
        Landmark("Mill Street", rect_polygon(10, 10, 50, 20), "street"),
        Landmark("Sidney Street", rect_polygon(100, 100, 150, 110), "street"),
    ])
    with pytest.raises(Ambiguous):
        landmark_segment(s, "Street")


# -- terrain ---------------------------------------------------------------


def test_terrain_node_and_flat_cell():
    s = make_flat_scene(ground=7.0)
    assert terrain_height(s, 0.0, 0.0) == 7.0     # grid node
    assert terrain_height(s, 3.0, 5.0) == 7.0     # interior of a flat cell


def test_terrain_bilinear_midpoint():
    # corners 0,0 on the left edge and 10,10 on the right of one cell
    s = make_flat_scene(extent=600.0)
    s.heightfield[:, 1] = 10.0
    # x=1 is halfway between the x=0 column (h 0) and x=2 column (h 10)
    assert terrain_height(s, 1.0, 0.0) == pytest.approx(5.0, abs=1e-9)


def test_terrain_out_of_extent():
    s = make_flat_scene()
    with pytest.raises(OutOfExtent):
        terrain_height(s, -1.0, 0.0)
    with pytest.raises(OutOfExtent):
        terrain_height(s, 0.0, 601.0)


def test_terrain_matches_vectorized(gen_scene):
    # scalar fast path against the vectorized sampler
    from aeronav.worldmodel import _sample_bilinear
    rng = np.random.default_rng(0)
    w, h = gen_scene.extent
    xs = rng.uniform(0, w, 200)
    ys = rng.uniform(0, h, 200)
    vec = _sample_bilinear(gen_scene.heightfield, gen_scene.cell_size, xs, ys)
    for x, y, v in zip(xs, ys, vec):
        assert terrain_height(gen_scene, x, y) == pytest.approx(float(v), abs=1e-6)


# -- polygon containment ---------------------------------------------------


def _winding_number_inside(poly, u, v):
    """Independent containment oracle (winding number, crossing form)."""
    wn = 0
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        if y0 <= v:
            if y1 > v and (x1 - x0) * (v - y0) - (u - x0) * (y1 - y0) > 0:
                wn += 1
        elif y1 <= v and (x1 - x0) * (v - y0) - (u - x0) * (y1 - y0) < 0:
            wn -= 1
    return wn != 0


def test_containment_centroid_and_outside():
    assert point_in_landmark(SIDNEY, *SIDNEY.centroid())
    assert not point_in_landmark(SIDNEY, 199.0, 279.0)


def test_containment_boundary_inclusive():
    assert point_in_landmark(SIDNEY, 200.0, 300.0)
    assert point_in_landmark(SIDNEY, 300.0, 280.0)


def test_containment_vs_winding_oracle():
    tri = Landmark("Tri", [(0.0, 0.0), (10.0, 0.0), (5.0, 8.0)], "park")
    rng = np.random.default_rng(11)
    for _ in range(100):
        u = rng.uniform(-2, 12)
        v = rng.uniform(-2, 10)
        got = point_in_landmark(tri, u, v)
        want = _winding_number_inside(tri.polygon, u, v)
        if got != want:
            # disagreement allowed only within a hair of the boundary
            assert landmark_distance(tri, u, v) < 1e-6


def test_polygon_area_unit_square():
    assert polygon_area(rect_polygon(0, 0, 1, 1)) == 1.0
    assert polygon_area(list(reversed(rect_polygon(0, 0, 2, 3)))) == 6.0


def test_landmark_distance():
    assert landmark_distance(SIDNEY, 300.0, 300.0) == 0.0
    assert landmark_distance(SIDNEY, 300.0, 330.0) == pytest.approx(10.0)
    assert landmark_distance(SIDNEY, 410.0, 300.0) == pytest.approx(10.0)
    assert landmark_distance(SIDNEY, 403.0, 324.0) == pytest.approx(5.0)


def test_landmarks_geojson(flat_scene):
    fc = landmarks_geojson(flat_scene)
    assert fc["type"] == "FeatureCollection"
    names = {f["properties"]["name"] for f in fc["features"]}
    assert "Sidney Street" in names
    geom = fc["features"][0]["geometry"]
    assert geom["type"] == "Polygon"
    ring = geom["coordinates"][0]
    assert ring[0] == ring[-1]
