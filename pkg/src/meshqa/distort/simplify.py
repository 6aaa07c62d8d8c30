"""Surface simplification by iterative edge collapse with quadric errors.

Quadrics live in a 5D position+UV space so a collapse pays for both geometric
and texture-coordinate deviation. The mesh is first split into "wedges"
(unique position/uv index pairs); texture seams and open boundaries then show
up as 1-sided edges and receive a large penalty quadric that pins them down.
"""

import heapq

import numpy as np

from ..assets.mesh import IndexedMesh
from ..errors import NoUVs, TargetUnreachable

UV_WEIGHT = 1.0
BOUNDARY_PENALTY = 100.0
_SOLVE_CAP = 10.0  # reject optimal points this far outside the unit-scale model


def level_index(lod):
    """Accept 1..10, '3', or 'L3'-style labels; return the integer level."""
    if isinstance(lod, str):
        text = lod[1:] if lod[:1] in ("L", "l") else lod
        try:
            lod = int(text)
        except ValueError:
            raise ValueError(f"bad LoD label {lod!r}") from None
    lod = int(lod)
    if not 1 <= lod <= 10:
        raise ValueError(f"LoD level out of range: {lod}")
    return lod


def face_target(n_faces0, lod, floor_faces=2000):
    """Target face count: remove lod * (N0 - floor)/10 faces."""
    k = level_index(lod)
    delta = (n_faces0 - floor_faces) / 10.0
    return int(round(n_faces0 - k * delta))


def _build_wedges(mesh):
    pairs = np.stack([mesh.faces_pos.ravel(), mesh.faces_uv.ravel()], axis=1)
    uniq, inverse = np.unique(pairs, axis=0, return_inverse=True)
    faces = inverse.reshape(-1, 3).astype(np.int64)
    pos = mesh.positions[uniq[:, 0]]
    uv = mesh.uvs[uniq[:, 1]]
    return pos, uv, faces


def _face_quadrics(points, faces):
    """Area-weighted plane-distance quadrics (A, b, c) per face corner vertex."""
    nv, dim = points.shape
    p = points[faces[:, 0]]
    q = points[faces[:, 1]]
    r = points[faces[:, 2]]
    e1 = q - p
    n1 = np.linalg.norm(e1, axis=1, keepdims=True)
    e1 = np.divide(e1, n1, out=np.zeros_like(e1), where=n1 > 1e-30)
    d = r - p
    e2 = d - np.sum(d * e1, axis=1, keepdims=True) * e1
    n2 = np.linalg.norm(e2, axis=1, keepdims=True)
    e2 = np.divide(e2, n2, out=np.zeros_like(e2), where=n2 > 1e-30)

    area = 0.5 * np.linalg.norm(
        np.cross(q[:, :3] - p[:, :3], r[:, :3] - p[:, :3]), axis=1
    )

    eye = np.eye(dim)
    a_face = eye[None] - np.einsum("fi,fj->fij", e1, e1) - np.einsum("fi,fj->fij", e2, e2)
    pe1 = np.sum(p * e1, axis=1)
    pe2 = np.sum(p * e2, axis=1)
    b_face = pe1[:, None] * e1 + pe2[:, None] * e2 - p
    c_face = np.sum(p * p, axis=1) - pe1**2 - pe2**2

    a_face *= area[:, None, None]
    b_face *= area[:, None]
    c_face *= area

    A = np.zeros((nv, dim, dim))
    b = np.zeros((nv, dim))
    c = np.zeros(nv)
    for corner in range(3):
        np.add.at(A, faces[:, corner], a_face)
        np.add.at(b, faces[:, corner], b_face)
        np.add.at(c, faces[:, corner], c_face)
    return A, b, c


def _add_boundary_quadrics(points, faces, A, b, c, penalty):
    edges = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    edges = np.sort(edges, axis=1)
    uniq, counts = np.unique(edges, axis=0, return_counts=True)
    open_edges = uniq[counts == 1]
    if len(open_edges) == 0:
        return
    p = points[open_edges[:, 0]]
    q = points[open_edges[:, 1]]
    d = q - p
    length3 = np.linalg.norm(d[:, :3], axis=1)
    nd = np.linalg.norm(d, axis=1, keepdims=True)
    d = np.divide(d, nd, out=np.zeros_like(d), where=nd > 1e-30)
    dim = points.shape[1]
    a_e = np.eye(dim)[None] - np.einsum("ei,ej->eij", d, d)
    pd = np.sum(p * d, axis=1)
    b_e = pd[:, None] * d - p
    c_e = np.sum(p * p, axis=1) - pd**2
    w = penalty * length3**2
    a_e *= w[:, None, None]
    b_e *= w[:, None]
    c_e *= w
    for side in (0, 1):
        np.add.at(A, open_edges[:, side], a_e)
        np.add.at(b, open_edges[:, side], b_e)
        np.add.at(c, open_edges[:, side], c_e)


def _quadric_cost(A, b, c, v):
    return float(v @ A @ v + 2.0 * (b @ v) + c)


def _optimal_point(A, b, c, pi, pj):
    try:
        v = np.linalg.solve(A, -b)
        if np.all(np.isfinite(v)) and np.abs(v).max() <= _SOLVE_CAP:
            return v, _quadric_cost(A, b, c, v)
    except np.linalg.LinAlgError:
        pass
    candidates = (pi, pj, 0.5 * (pi + pj))
    costs = [_quadric_cost(A, b, c, v) for v in candidates]
    k = int(np.argmin(costs))
    return candidates[k], costs[k]


def _simplify_pass(mesh, targets):
    """One greedy collapse pass, snapshotting the mesh at each target count.

    targets must be strictly decreasing face counts. Returns the snapshots in
    the same order.
    """
    if not mesh.has_uvs():
        raise NoUVs("simplification needs texture coordinates on every face")
    pos, uv, faces = _build_wedges(mesh)

    center = 0.5 * (pos.min(axis=0) + pos.max(axis=0))
    extent = float((pos.max(axis=0) - pos.min(axis=0)).max())
    scale = extent if extent > 0 else 1.0
    points = np.concatenate([(pos - center) / scale, UV_WEIGHT * uv], axis=1)

    A, b, c = _face_quadrics(points, faces)
    _add_boundary_quadrics(points, faces, A, b, c, BOUNDARY_PENALTY)

    nv = len(points)
    alive_v = np.ones(nv, dtype=bool)
    alive_f = np.ones(len(faces), dtype=bool)
    version = np.zeros(nv, dtype=np.int64)
    vertex_faces = [set() for _ in range(nv)]
    for fi, f in enumerate(faces):
        for vi in f:
            vertex_faces[vi].add(fi)

    heap = []

    def push_edge(i, j):
        i, j = (i, j) if i < j else (j, i)
        v_opt, cost = _optimal_point(A[i] + A[j], b[i] + b[j], c[i] + c[j], points[i], points[j])
        heapq.heappush(heap, (cost, i, j, version[i], version[j], v_opt))

    seen = set()
    for f in faces:
        for i, j in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
            key = (i, j) if i < j else (j, i)
            if key not in seen:
                seen.add(key)
                push_edge(*key)
    del seen

    n_alive = len(faces)
    snapshots = []
    targets = list(targets)
    t_idx = 0

    def snapshot():
        keep = np.nonzero(alive_f)[0]
        fa = faces[keep]
        used = np.unique(fa)
        remap = np.full(nv, -1, dtype=np.int64)
        remap[used] = np.arange(len(used))
        out_pos = points[used, :3] * scale + center
        out_uv = points[used, 3:] / UV_WEIGHT
        new_faces = remap[fa]
        return IndexedMesh(out_pos, out_uv, new_faces, new_faces.copy(), name=mesh.name)

    while t_idx < len(targets):
        if n_alive <= targets[t_idx]:
            snapshots.append(snapshot())
            t_idx += 1
            continue
        if not heap:
            raise TargetUnreachable(
                f"no collapsible edges left at {n_alive} faces (target {targets[t_idx]})"
            )
        cost, i, j, vi_ver, vj_ver, v_opt = heapq.heappop(heap)
        if not (alive_v[i] and alive_v[j]) or version[i] != vi_ver or version[j] != vj_ver:
            continue
        shared = vertex_faces[i] & vertex_faces[j]
        if not shared:
            continue  # edge no longer exists

        # merge j into i at the optimal point
        points[i] = v_opt
        A[i] += A[j]
        b[i] += b[j]
        c[i] += c[j]
        alive_v[j] = False
        for fi in shared:
            if alive_f[fi]:
                alive_f[fi] = False
                n_alive -= 1
                for vk in faces[fi]:
                    vertex_faces[vk].discard(fi)
        for fi in list(vertex_faces[j]):
            f = faces[fi]
            faces[fi] = np.where(f == j, i, f)
            vertex_faces[i].add(fi)
        vertex_faces[j].clear()
        version[i] += 1
        version[j] += 1

        neighbors = set()
        for fi in vertex_faces[i]:
            if alive_f[fi]:
                for vk in faces[fi]:
                    if vk != i:
                        neighbors.add(int(vk))
        for vk in sorted(neighbors):
            push_edge(i, vk)

    return snapshots


def simplify_qem(mesh, lod, floor_faces=2000):
    """Simplify to the face-count target of the given level (L1..L10)."""
    n0 = mesh.n_faces
    if n0 <= floor_faces:
        raise TargetUnreachable(f"mesh has {n0} faces; needs more than {floor_faces}")
    return _simplify_pass(mesh, [face_target(n0, lod, floor_faces)])[0]


def simplify_levels(mesh, lods, floor_faces=2000):
    """Simplify once, returning {level: mesh} for each requested level.

    Equivalent to calling simplify_qem per level (the greedy collapse order
    does not depend on the target) but runs a single pass.
    """
    n0 = mesh.n_faces
    if n0 <= floor_faces:
        raise TargetUnreachable(f"mesh has {n0} faces; needs more than {floor_faces}")
    levels = sorted({level_index(l) for l in lods})
    targets = [face_target(n0, k, floor_faces) for k in levels]
    snaps = _simplify_pass(mesh, targets)
    return dict(zip(levels, snaps))
