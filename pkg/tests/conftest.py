"""Shared fixtures: the bundled 12-tet manifold and small constructed gluings."""

import json

import pytest

from crflow.fixtures import path as fixture_path
from crflow.triangulation import FACES, parse_triangulation


@pytest.fixture(scope="session")
def twelve_tet_doc():
    return json.loads(fixture_path("twelve_tet.json").read_text())


@pytest.fixture(scope="session")
def twelve_tet():
    return parse_triangulation(fixture_path("twelve_tet.json").read_text())


@pytest.fixture(scope="session")
def expected():
    return json.loads(fixture_path("twelve_tet.expected.json").read_text())


def make_doc(rows):
    """rows: list of (ideal_vertices, [gluing or None] * 4)."""
    return {"tetrahedra": [
        {"ideal_vertices": list(ideal),
         "gluings": [None if g is None else [g[0], list(g[1])] for g in gluings]}
        for ideal, gluings in rows
    ]}


@pytest.fixture
def isolated_tet_doc():
    """One fully hyper-ideal tetrahedron, all faces free."""
    return make_doc([((), [None, None, None, None])])


@pytest.fixture
def sphere_double_doc():
    """Two fully hyper-ideal tetrahedra glued by the identity on all four
    faces; every vertex link is a 2-sphere."""
    idg = [(1, (0, 1, 2)), (1, (0, 1, 3)), (1, (0, 2, 3)), (1, (1, 2, 3))]
    idg0 = [(0, (0, 1, 2)), (0, (0, 1, 3)), (0, (0, 2, 3)), (0, (1, 2, 3))]
    return make_doc([((), idg), ((), idg0)])


@pytest.fixture
def improper_two_tet_doc():
    """Two one-ideal-vertex tetrahedra with all ideal faces glued but the
    cross edges of one gluing landing in distinct classes."""
    t0 = [(1, (0, 1, 3)), (1, (0, 1, 2)), (1, (0, 2, 3)), None]
    t1 = [(0, (0, 1, 3)), (0, (0, 1, 2)), (0, (0, 2, 3)), None]
    return make_doc([((0,), t0), ((0,), t1)])


@pytest.fixture
def nonorientable_two_tet_doc():
    """Two fully hyper-ideal tetrahedra glued along two faces whose induced
    orientations conflict."""
    t0 = [(1, (0, 1, 2)), (1, (0, 3, 1)), None, None]
    t1 = [(0, (0, 1, 2)), (0, (0, 3, 1)), None, None]
    return make_doc([((), t0), ((), t1)])


@pytest.fixture
def fan10_doc():
    """Ten fully hyper-ideal tetrahedra around a common edge (0,1): a single
    hyper-ideal class of valence 10, every incident tetrahedron of 4-0 type."""
    rows = []
    n = 10
    for i in range(n):
        gluings = [None] * 4
        # face 012 of tet i -> face 013 of tet i+1 via 0->0, 1->1, 2->3
        gluings[0] = ((i + 1) % n, (0, 1, 3))
        # mirrored entry: face 013 of tet i -> face 012 of tet i-1
        gluings[1] = ((i - 1) % n, (0, 1, 2))
        rows.append(((), gluings))
    return make_doc(rows)


def relabel_doc(doc, tet_perm, vertex_perms):
    """Isomorphic copy: tetrahedron t becomes tet_perm[t], vertex v of tet t
    becomes vertex_perms[t][v]."""
    n = len(doc["tetrahedra"])
    out = [{"ideal_vertices": None, "gluings": [None] * 4} for _ in range(n)]
    for t, row in enumerate(doc["tetrahedra"]):
        vp = vertex_perms[t]
        inv = {vp[v]: v for v in range(4)}
        out[tet_perm[t]]["ideal_vertices"] = sorted(vp[v] for v in row["ideal_vertices"])
        for f, entry in enumerate(row["gluings"]):
            new_face = tuple(sorted(vp[v] for v in FACES[f]))
            f2 = FACES.index(new_face)
            if entry is None:
                continue
            target, image = entry
            old_map = dict(zip(FACES[f], image))
            vpu = vertex_perms[target]
            out[tet_perm[t]]["gluings"][f2] = [
                tet_perm[target],
                [vpu[old_map[inv[v]]] for v in new_face],
            ]
    return {"tetrahedra": out}
