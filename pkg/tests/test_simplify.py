import numpy as np
import pytest

from meshqa.distort.simplify import face_target, level_index, simplify_levels, simplify_qem
from meshqa.errors import NoUVs, TargetUnreachable
from meshqa.shapes import unit_quad, uv_sphere


def test_face_target_formula():
    # 100000 faces: delta = 9800, L3 removes 3 * 9800
    assert face_target(100000, 3) == 70600
    assert face_target(100000, 10) == 2000


def test_level_labels():
    assert level_index("L4") == 4
    assert level_index(7) == 7
    with pytest.raises(ValueError):
        level_index(0)
    with pytest.raises(ValueError):
        level_index("X2")


@pytest.fixture(scope="module")
def sphere():
    mesh = uv_sphere(48, 52)  # 2 * 48 * 52 - 2 * 52 = 4888 faces
    assert mesh.n_faces > 2000
    return mesh


def test_targets_hit_within_one_percent(sphere):
    n0 = sphere.n_faces
    for lod in (1, 5, 10):
        out = simplify_qem(sphere, lod)
        target = face_target(n0, lod)
        assert abs(out.n_faces - target) <= max(1, 0.01 * target)
        out.validate_indices()


def test_l10_lands_near_2000_faces(sphere):
    out = simplify_qem(sphere, 10)
    assert abs(out.n_faces - 2000) <= 20


def test_counts_monotone_over_levels(sphere):
    results = simplify_levels(sphere, range(1, 11))
    counts = [results[k].n_faces for k in range(1, 11)]
    assert all(a > b for a, b in zip(counts, counts[1:]))
    assert all(results[k].n_faces <= sphere.n_faces for k in results)


def test_single_pass_matches_per_level_runs(sphere):
    levels = simplify_levels(sphere, [2, 6])
    solo = simplify_qem(sphere, 6)
    assert np.array_equal(levels[6].positions, solo.positions)
    assert np.array_equal(levels[6].faces_pos, solo.faces_pos)


def test_deterministic(sphere):
    a = simplify_qem(sphere, 4)
    b = simplify_qem(sphere, 4)
    assert np.array_equal(a.positions, b.positions)
    assert np.array_equal(a.faces_pos, b.faces_pos)


def test_requires_uvs():
    mesh = uv_sphere(40, 40)
    mesh.faces_uv[:] = -1
    with pytest.raises(NoUVs):
        simplify_qem(mesh, 3)


def test_too_small_mesh_rejected():
    with pytest.raises(TargetUnreachable):
        simplify_qem(unit_quad(), 1)


def test_uvs_stay_in_unit_square(sphere):
    out = simplify_qem(sphere, 8)
    assert out.uvs.min() >= -0.05 and out.uvs.max() <= 1.05


def test_geometry_stays_near_sphere(sphere):
    out = simplify_qem(sphere, 5)
    radii = np.linalg.norm(out.positions, axis=1)
    # collapsed chords sag inward; a gross deviation means a broken quadric
    assert radii.max() < 1.1
    assert np.median(radii) > 0.9
