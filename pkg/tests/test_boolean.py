import itertools
import json
import math

import numpy as np
import pytest

from oracles import minimax_depth, random_boxes, random_disks
from rcmsim.boolean import (
    build_nerve,
    grains_from_json,
    grains_to_json,
    intersection_graph_components,
    load_grains,
    mixing_parameter_bound,
    nerve_of_grains,
    raster_betti_2d,
    ring6,
)
from rcmsim.errors import CapabilityError, RejectedInputError
from rcmsim.grains import Grain, Overlap, PlacedGrain, grains_intersect, smallest_enclosing_ball
from rcmsim.homology import betti_vector
from rcmsim.pointprocess import Window, from_points
from rcmsim.svg import nerve_svg

UNIT = Grain.ball(1.0)


def _triangle(side):
    h = side * math.sqrt(3) / 2
    return [PlacedGrain(p, UNIT) for p in [(0.0, 0.0), (side, 0.0), (side / 2, h)]]


def test_intersect_examples():
    assert grains_intersect(_triangle(1.0)) is Overlap.INTERSECT
    assert grains_intersect(_triangle(2.1)) is Overlap.DISJOINT
    a = PlacedGrain((0.0, 0.0), Grain.box((1.0, 1.0)))
    b = PlacedGrain((2.5, 0.0), Grain.box((1.0, 1.0)))
    assert not grains_intersect([a, b])
    assert grains_intersect([a, PlacedGrain((1.9, 1.9), Grain.box((1.0, 1.0)))])
    with pytest.raises(CapabilityError):
        grains_intersect([a, PlacedGrain((0.0, 0.0), UNIT)])
    with pytest.raises(RejectedInputError):
        grains_intersect([])
    with pytest.raises(RejectedInputError):
        Grain.ball(-1.0)


def test_smallest_enclosing_ball():
    rng = np.random.default_rng(0)
    for _ in range(50):
        pts = rng.normal(size=(int(rng.integers(1, 12)), 2))
        c, r = smallest_enclosing_ball(pts)
        assert np.linalg.norm(pts - c, axis=1).max() <= r + 1e-9
        # minimax over equal zero radii is the enclosing radius
        assert r == pytest.approx(minimax_depth(pts, np.zeros(len(pts))), abs=1e-5)


def test_variable_radius_matches_minimax():
    rng = np.random.default_rng(1)
    checked = 0
    while checked < 60:
        k = int(rng.integers(2, 5))
        centers = rng.uniform(0, 2.5, size=(k, 2))
        radii = rng.uniform(0.3, 1.2, size=k)
        depth = minimax_depth(centers, radii)
        if abs(depth) < 1e-4:
            continue
        grains = [PlacedGrain(tuple(c), Grain.ball(r)) for c, r in zip(centers, radii)]
        got = grains_intersect(grains)
        assert got is (Overlap.INTERSECT if depth < 0 else Overlap.DISJOINT)
        for perm in itertools.permutations(range(k)):
            assert grains_intersect([grains[i] for i in perm]) is got
        checked += 1


def test_nerve_examples():
    assert nerve_of_grains([PlacedGrain((0.0, 0.0), UNIT)], 2).f_vector == (1,)
    boxes = [PlacedGrain((0.0, 0.0), Grain.box((1.0, 1.0))), PlacedGrain((1.5, 0.0), Grain.box((1.0, 1.0)))]
    assert nerve_of_grains(boxes, 2).f_vector == (2, 1)
    n = nerve_of_grains(ring6(), 3)
    assert n.f_vector == (6, 6) and betti_vector(n, 1) == (1, 1)
    cfg = from_points(Window(2, 4.0), [(0, 0)])
    with pytest.raises(RejectedInputError):
        build_nerve(cfg, 2)


def test_helly_and_components_on_random_boxes(rng):
    for _ in range(30):
        grains = random_boxes(rng)
        nerve = nerve_of_grains(grains, 4)
        assert nerve == nerve_of_grains(grains, 4, direct=True)
        assert betti_vector(nerve, 0)[0] == intersection_graph_components(grains)


def test_helly_and_raster_on_random_disks(rng):
    for k in range(15):
        grains = random_disks(rng, margin=4 / 128, n_max=10, equal=k % 2 == 0)
        nerve = nerve_of_grains(grains, 3)
        assert nerve == nerve_of_grains(grains, 3, direct=True)
        assert betti_vector(nerve, 1) == raster_betti_2d(grains, 128)


def test_raster_examples():
    assert raster_betti_2d([PlacedGrain((0.0, 0.0), UNIT)], 64) == (1, 0)
    assert raster_betti_2d(ring6(), 128) == (1, 1)
    two = [PlacedGrain((0.0, 0.0), UNIT), PlacedGrain((3.0, 0.0), UNIT)]
    assert raster_betti_2d(two, 64) == (2, 0)
    assert raster_betti_2d([], 64) == (0, 0)
    with pytest.raises(RejectedInputError):
        raster_betti_2d(two, 32)


def test_mixing_bound_values():
    assert mixing_parameter_bound(1.0, 1.0) == pytest.approx(4 * math.pi)
    assert mixing_parameter_bound(0.0, 1.0) == 0.0
    assert mixing_parameter_bound(1.0, 0.5, d=1) == pytest.approx(2.0)
    with pytest.raises(RejectedInputError):
        mixing_parameter_bound(1.0, 0.0)


def test_grain_files_round_trip(tmp_path):
    grains = ring6() + [PlacedGrain((9.0, 9.0), Grain.box((0.5, 0.25)))]
    obj = grains_to_json(grains)
    assert grains_from_json(obj) == grains
    assert grains_from_json(obj["grains"]) == grains
    rec = obj["grains"][0]
    assert set(rec) == {"center", "ball"}
    path = tmp_path / "g.json"
    path.write_text(json.dumps(obj))
    assert load_grains(path) == grains
    with pytest.raises(RejectedInputError):
        grains_from_json({"grains": 3})


def test_nerve_svg_has_two_panels():
    grains = ring6()
    svg = nerve_svg(grains, nerve_of_grains(grains, 2))
    assert svg.startswith("<svg") and svg.count("<circle") >= 12
    three_d = [PlacedGrain((0.0, 0.0, 0.0), UNIT)]
    with pytest.raises(CapabilityError):
        nerve_svg(three_d, nerve_of_grains(three_d, 2))


# disks 7 and 12 cross at about 19 degrees; sampling pixel centres at 512 per
# unit cuts the tip of the empty cusp between them into a closed one-pixel hole
SHALLOW_CROSSING = [
    (2.989772801363189, 2.218895715512101, 0.7021537430321627),
    (1.5223806772412032, 4.930475727180466, 0.7567731799818184),
    (0.37649332840373706, 3.887622239153882, 0.9125625972376781),
    (5.519311935811833, 0.17359246372635972, 0.4729095188689747),
    (4.7420901633493475, 3.4162975144976997, 0.6261282658752261),
    (5.382378608646991, 0.8206427357700283, 0.7298626165109126),
    (0.9478741628411604, 2.3269336385091104, 0.46576187303998084),
    (1.7158587322253627, 2.6461396900001333, 0.7784848407096829),
    (3.573640933009059, 2.8857536996380437, 0.8923384254798006),
    (2.534642105520832, 5.985678636213913, 0.9197143321381283),
    (0.23488463163686601, 3.9678770840877178, 0.7603665529578159),
    (4.925301981309056, 5.802265728403742, 0.42147405114624276),
    (0.053146745889181, 3.1107276560530224, 0.9717444546082086),
]


@pytest.mark.parametrize("res", [128, 256, 512, 1024])
def test_raster_keeps_shallow_cusps_open(res):
    grains = [PlacedGrain((x, y), Grain.ball(r)) for x, y, r in SHALLOW_CROSSING]
    assert betti_vector(nerve_of_grains(grains, 3), 1) == (3, 0)
    assert raster_betti_2d(grains, res) == (3, 0)


def _box(x0, x1, y0, y1):
    return PlacedGrain(((x0 + x1) / 2, (y0 + y1) / 2), Grain.box(((x1 - x0) / 2, (y1 - y0) / 2)))


def test_raster_keeps_holes_smaller_than_a_pixel():
    # a pinwheel of four boxes around the open square (-g/2, g/2)^2
    g = 0.004
    h = g / 2
    wheel = [_box(-1, h, h, 1), _box(h, 1, -h, 1), _box(-h, 1, -1, -h), _box(-1, -h, -1, h)]
    assert betti_vector(nerve_of_grains(wheel, 3), 1) == (1, 1)
    assert raster_betti_2d(wheel, 64) == (1, 1)
    with pytest.raises(CapabilityError):
        raster_betti_2d([wheel[0], PlacedGrain((5.0, 5.0), UNIT)], 64)
