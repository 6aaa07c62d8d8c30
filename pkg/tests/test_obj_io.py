import numpy as np
import pytest

from meshqa.assets import IndexedMesh, parse_obj, write_obj, zero_area_triangles
from meshqa.assets.mesh import NO_UV
from meshqa.errors import IndexOutOfRange, MalformedStatement

MINIMAL = """\
v 0 0 0
v 1 0 0
v 0 1 0
vt 0 0
vt 1 0
vt 0 1
f 1/1 2/2 3/3
"""


def reference_face_indices(text):
    """Independent face-index resolver used as an oracle for index handling.

    Walks the file with its own counters and resolves 1-based/negative
    indices without reusing any package code.
    """
    n_v = 0
    n_vt = 0
    faces = []
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            n_v += 1
        elif parts[0] == "vt":
            n_vt += 1
        elif parts[0] == "f":
            corners = []
            for tok in parts[1:]:
                bits = tok.split("/")
                vi = int(bits[0])
                vi = vi - 1 if vi > 0 else n_v + vi
                ti = None
                if len(bits) > 1 and bits[1]:
                    ti = int(bits[1])
                    ti = ti - 1 if ti > 0 else n_vt + ti
                corners.append((vi, ti))
            faces.append(corners)
    return faces


def test_minimal_file():
    mesh = parse_obj(MINIMAL)
    assert mesh.n_vertices == 3
    assert mesh.n_uvs == 3
    assert mesh.n_faces == 1
    assert mesh.faces_pos.tolist() == [[0, 1, 2]]
    assert mesh.faces_uv.tolist() == [[0, 1, 2]]


def test_quad_fan_triangulation():
    text = MINIMAL.replace("f 1/1 2/2 3/3", "") + "v 1 1 0\nvt 1 1\nf 1/1 2/2 4/4 3/3\n"
    mesh = parse_obj(text)
    assert mesh.n_faces == 2
    assert mesh.faces_pos.tolist() == [[0, 1, 3], [0, 3, 2]]


def test_negative_indices_match_reference_resolver():
    text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nf -3/-3 -2/-2 -1/-1\n"
    mesh = parse_obj(text)
    expected = reference_face_indices(text)
    assert mesh.faces_pos.tolist() == [[c[0] for c in expected[0]]]
    assert mesh.faces_uv.tolist() == [[c[1] for c in expected[0]]]
    assert mesh.faces_pos.tolist() == [[0, 1, 2]]


def test_face_without_uv_gets_sentinel():
    text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n"
    mesh = parse_obj(text)
    assert mesh.faces_uv.tolist() == [[NO_UV] * 3]
    assert not mesh.has_uvs()


def test_normals_parsed_and_discarded():
    text = MINIMAL + "vn 0 0 1\n"
    mesh = parse_obj(text)
    assert mesh.n_faces == 1


def test_malformed_statement_reports_line():
    with pytest.raises(MalformedStatement) as err:
        parse_obj("v 0 0 0\nv 1 0\n")
    assert err.value.line_no == 2


def test_unknown_keyword_rejected():
    with pytest.raises(MalformedStatement):
        parse_obj("vx 1 2 3\n")


def test_index_out_of_range():
    with pytest.raises(IndexOutOfRange) as err:
        parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n")
    assert err.value.line_no == 4


def test_roundtrip_single_triangle_bit_identical():
    mesh = parse_obj(MINIMAL)
    text = write_obj(mesh)
    again = parse_obj(text)
    assert text == write_obj(again)
    assert np.array_equal(mesh.positions, again.positions)
    assert np.array_equal(mesh.uvs, again.uvs)
    assert np.array_equal(mesh.faces_pos, again.faces_pos)
    assert np.array_equal(mesh.faces_uv, again.faces_uv)


def test_roundtrip_empty_mesh():
    empty = IndexedMesh(
        np.zeros((0, 3)), np.zeros((0, 2)), np.zeros((0, 3), int), np.zeros((0, 3), int)
    )
    again = parse_obj(write_obj(empty))
    assert again.n_vertices == 0 and again.n_faces == 0


def test_roundtrip_random_meshes_index_equal():
    rng = np.random.default_rng(7)
    for _ in range(5):
        nv, nt, nf = 10000, 5000, 3000
        mesh = IndexedMesh(
            rng.normal(size=(nv, 3)),
            rng.random(size=(nt, 2)),
            rng.integers(0, nv, size=(nf, 3)),
            rng.integers(0, nt, size=(nf, 3)),
            name="random",
        )
        again = parse_obj(write_obj(mesh))
        assert np.array_equal(mesh.faces_pos, again.faces_pos)
        assert np.array_equal(mesh.faces_uv, again.faces_uv)
        assert np.array_equal(mesh.positions, again.positions)
        assert np.array_equal(mesh.uvs, again.uvs)


def test_zero_area_report():
    text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 1 2\nf 1 2 3\n"
    mesh = parse_obj(text)
    assert zero_area_triangles(mesh).tolist() == [0]


def test_relative_and_comment_and_groups():
    text = "# header\no thing\nv 0 0 0\nv 1 0 0\nv 0 1 0\nusemtl mat\nf 1 2 3\n"
    mesh = parse_obj(text)
    assert mesh.name == "thing"
    assert mesh.n_faces == 1
