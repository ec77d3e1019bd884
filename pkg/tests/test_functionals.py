import itertools
import json
import math

import numpy as np
import pytest

from oracles import bfs_components, induced_count_bruteforce, isomorphic_bruteforce, random_complex
from rcmsim.complex import SimplicialComplex, disjoint_union, relabel, restrict_complex
from rcmsim.errors import CapabilityError, RejectedInputError
from rcmsim.functionals import (
    connected_components,
    count_induced_subcomplexes,
    count_isomorphic_components,
    degree_count,
    euler_characteristic,
    f_count,
    full_simplex,
    is_isomorphic,
    make_K_p,
    make_L_p,
    named_complex,
    parse_functional,
    simplex_degree,
)
from rcmsim.homology import betti

PATH3 = SimplicialComplex.from_simplices([(0, 1), (1, 2)])
TRIANGLE = make_K_p(1)


def test_euler_examples():
    assert euler_characteristic(TRIANGLE) == 0
    for pair in itertools.combinations(TRIANGLE.vertex_ids, 2):
        assert euler_characteristic(restrict_complex(TRIANGLE, pair)) == 1
    for j in range(6):
        assert euler_characteristic(full_simplex(j)) == 1
    assert euler_characteristic(SimplicialComplex.empty()) == 0


def test_f_count_examples():
    skel = SimplicialComplex.from_simplices(itertools.combinations(range(5), 3))
    assert f_count(skel, 2) == 10
    assert f_count(SimplicialComplex.empty(), 0) == 0
    rng = np.random.default_rng(2)
    for _ in range(20):
        c = random_complex(rng)
        obj = c.to_json()
        for j in range(c.dim + 1):
            assert f_count(c, j) == len(obj["simplices"][str(j)] if j else obj["vertices"])
    with pytest.raises(RejectedInputError):
        f_count(skel, -1)


def test_components():
    isolated = SimplicialComplex.from_simplices([(v,) for v in (4, 1, 9)])
    assert connected_components(isolated) == [(1,), (4,), (9,)]
    path = SimplicialComplex.from_simplices([(0, 1), (1, 2), (2, 3)])
    assert connected_components(path) == [(0, 1, 2, 3)]
    rng = np.random.default_rng(5)
    for _ in range(100):
        c = random_complex(rng, max_vertices=10, max_facets=5)
        assert connected_components(c) == bfs_components(c.vertex_ids, c.level(1))


def test_simplex_degree():
    star = SimplicialComplex.from_simplices([(0, k) for k in range(1, 6)] + [(9,)])
    assert simplex_degree(star, 9, 1) == 0
    assert simplex_degree(star, 0, 1) == 5
    skel = SimplicialComplex.from_simplices(itertools.combinations(range(6), 3))
    assert all(simplex_degree(skel, v, 2) == 10 for v in range(6))
    with pytest.raises(RejectedInputError):
        simplex_degree(star, 42, 1)


def test_degree_counts_sum_to_vertices():
    rng = np.random.default_rng(9)
    for _ in range(50):
        c = random_complex(rng)
        for m in (1, 2):
            assert sum(degree_count(c, m, l) for l in range(c.f(0) ** 3 + 1)) == c.f(0)


def test_isomorphism_examples():
    assert is_isomorphic(TRIANGLE, TRIANGLE)
    assert not is_isomorphic(TRIANGLE, PATH3)
    rng = np.random.default_rng(4)
    for _ in range(40):
        c = random_complex(rng, max_vertices=6)
        ids = c.vertex_ids
        a = relabel(c, dict(zip(ids, rng.permutation(100)[: len(ids)].tolist())))
        b = relabel(c, dict(zip(ids, rng.permutation(100)[: len(ids)].tolist())))
        assert is_isomorphic(a, b)
    big = SimplicialComplex.from_simplices([(v,) for v in range(11)])
    with pytest.raises(CapabilityError):
        is_isomorphic(big, big)


def test_isomorphism_matches_bruteforce():
    rng = np.random.default_rng(8)
    for _ in range(150):
        k = random_complex(rng, max_vertices=6, max_facets=5)
        l = random_complex(rng, max_vertices=6, max_facets=5)
        assert is_isomorphic(k, l) == isomorphic_bruteforce(k, l)


def test_induced_counts():
    # g_L of a full j-simplex with L = full i-simplex counts the (i)-faces
    for j in range(1, 6):
        for i in range(j + 1):
            assert count_induced_subcomplexes(full_simplex(j), full_simplex(i)) == math.comb(j + 1, i + 1)
    # 12 vertices: a triangle boundary plus a path and some noise
    c = SimplicialComplex.from_simplices(
        [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (5, 6, 7), (8, 9), (9, 10), (10, 8), (11,)])
    assert count_induced_subcomplexes(c, TRIANGLE) == induced_count_bruteforce(c, TRIANGLE) == 2
    assert count_induced_subcomplexes(c, PATH3) == induced_count_bruteforce(c, PATH3)
    rng = np.random.default_rng(6)
    for _ in range(30):
        k = random_complex(rng, max_vertices=7, max_facets=6)
        for pattern in (PATH3, TRIANGLE, full_simplex(2), full_simplex(1)):
            assert count_induced_subcomplexes(k, pattern) == induced_count_bruteforce(k, pattern)
    with pytest.raises(RejectedInputError):
        count_induced_subcomplexes(c, SimplicialComplex.from_simplices([(0,), (1,)]))


def test_component_counts():
    c = disjoint_union(TRIANGLE, TRIANGLE, PATH3, full_simplex(2))
    assert count_isomorphic_components(c, TRIANGLE) == 2
    assert count_isomorphic_components(c, PATH3) == 1
    rng = np.random.default_rng(12)
    for _ in range(40):
        k = random_complex(rng, max_vertices=9, max_facets=4)
        for pattern in (PATH3, TRIANGLE, full_simplex(0)):
            assert count_isomorphic_components(k, pattern) <= count_induced_subcomplexes(k, pattern)


def test_witness_properties():
    for p in (1, 2):
        lp = make_L_p(p)
        assert betti(lp, p) == 1
        for v in lp.vertex_ids:
            rest = [u for u in lp.vertex_ids if u != v]
            assert betti(restrict_complex(lp, rest), p) == 0
    for p in (1, 2, 3):
        assert betti(make_K_p(p), p) == 1
    assert named_complex("K_2") == make_K_p(2)
    assert named_complex("vertex").f_vector == (1,)
    with pytest.raises(RejectedInputError):
        named_complex("Q_1")


def test_descriptor_parsing(tmp_path):
    path = tmp_path / "pattern.json"
    path.write_text(json.dumps(TRIANGLE.to_json()))
    c = disjoint_union(TRIANGLE, PATH3)
    cases = {
        "betti:0": 2, "betti:p=1": 1, "euler": 1, "vertices": 6, "f:1": 5,
        "d:m=1,l=2": 4, "g_L:name=K_1": 1, "h_L:file=pattern.json": 1, "constant:value=2.5": 2.5,
    }
    for text, expected in cases.items():
        d = parse_functional(text, base_dir=tmp_path)
        assert d(c) == expected
        assert str(d) == text
    for bad in ["betti", "betti:p=-1", "d:m=0,l=1", "g_L", "nonsense", "constant:value=inf", "f:j=x",
                "g_L:name=bad"]:
        with pytest.raises(RejectedInputError):
            parse_functional(bad)
    with pytest.raises(CapabilityError):
        parse_functional("g_L:name=simplex_10")
