"""Indexed triangle meshes and Wavefront OBJ text I/O.

The mesh keeps positions and texture coordinates in separate index spaces,
exactly as OBJ does: each face corner is a (position index, uv index) pair.
Corners without a texture coordinate carry the sentinel index -1.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import IndexOutOfRange, MalformedStatement

NO_UV = -1


@dataclass
class IndexedMesh:
    """Triangle mesh with positions, UVs and per-corner index pairs.

    positions: (V, 3) float64, model units.
    uvs:       (T, 2) float64, nominally in [0,1]^2.
    faces_pos: (F, 3) int64 indices into positions.
    faces_uv:  (F, 3) int64 indices into uvs, or NO_UV where a corner has none.
    """

    positions: np.ndarray
    uvs: np.ndarray
    faces_pos: np.ndarray
    faces_uv: np.ndarray
    name: str = ""
    quantization_warning: bool = field(default=False, compare=False)

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        self.uvs = np.asarray(self.uvs, dtype=np.float64).reshape(-1, 2)
        self.faces_pos = np.asarray(self.faces_pos, dtype=np.int64).reshape(-1, 3)
        self.faces_uv = np.asarray(self.faces_uv, dtype=np.int64).reshape(-1, 3)

    @property
    def n_vertices(self):
        return len(self.positions)

    @property
    def n_uvs(self):
        return len(self.uvs)

    @property
    def n_faces(self):
        return len(self.faces_pos)

    def has_uvs(self):
        return self.n_faces > 0 and np.all(self.faces_uv >= 0)

    def validate_indices(self):
        """Raise IndexOutOfRange if any face references a missing vertex/uv."""
        if self.n_faces == 0:
            return
        if self.faces_pos.min() < 0 or self.faces_pos.max() >= self.n_vertices:
            raise IndexOutOfRange(0, "face position index out of bounds")
        used = self.faces_uv[self.faces_uv != NO_UV]
        if used.size and (used.min() < 0 or used.max() >= self.n_uvs):
            raise IndexOutOfRange(0, "face uv index out of bounds")

    def copy(self):
        return IndexedMesh(
            self.positions.copy(),
            self.uvs.copy(),
            self.faces_pos.copy(),
            self.faces_uv.copy(),
            name=self.name,
        )


def zero_area_triangles(mesh, eps=0.0):
    """Indices of faces whose triangle area is <= eps (degenerate faces).

    Parsing does not reject these; downstream code may want to drop them.
    """
    if mesh.n_faces == 0:
        return np.zeros(0, dtype=np.int64)
    p = mesh.positions[mesh.faces_pos]
    cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    area2 = np.linalg.norm(cross, axis=1)
    return np.nonzero(area2 <= 2.0 * eps)[0]


def _resolve_index(raw, count, line_no, text):
    # OBJ indices are 1-based; negative indices count back from the end.
    if raw > 0:
        idx = raw - 1
    elif raw < 0:
        idx = count + raw
    else:
        raise MalformedStatement(line_no, text)
    if idx < 0 or idx >= count:
        raise IndexOutOfRange(line_no, text)
    return idx


def _parse_corner(token, n_pos, n_uv, line_no, line):
    parts = token.split("/")
    if len(parts) > 3 or parts[0] == "":
        raise MalformedStatement(line_no, line)
    try:
        vi = _resolve_index(int(parts[0]), n_pos, line_no, line)
        ti = NO_UV
        if len(parts) >= 2 and parts[1] != "":
            ti = _resolve_index(int(parts[1]), n_uv, line_no, line)
        # parts[2] is the normal index: parsed for syntax, then discarded.
        if len(parts) == 3 and parts[2] != "":
            int(parts[2])
    except ValueError:
        raise MalformedStatement(line_no, line) from None
    return vi, ti


def parse_obj(text, name=""):
    """Parse OBJ text into an IndexedMesh.

    Supported statements: v, vt, vn (parsed, discarded), f, and the metadata
    statements o/g/s/usemtl/mtllib (recorded as the mesh name where sensible).
    Faces with more than 3 corners are fan-triangulated; negative indices are
    resolved relative to the counts seen so far.
    """
    if hasattr(text, "read"):
        text = text.read()
    positions = []
    uvs = []
    faces_pos = []
    faces_uv = []
    mesh_name = name

    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        key = fields[0]
        args = fields[1:]
        if key == "v":
            if len(args) < 3:
                raise MalformedStatement(line_no, raw_line)
            try:
                positions.append([float(args[0]), float(args[1]), float(args[2])])
            except ValueError:
                raise MalformedStatement(line_no, raw_line) from None
        elif key == "vt":
            if len(args) < 2:
                raise MalformedStatement(line_no, raw_line)
            try:
                uvs.append([float(args[0]), float(args[1])])
            except ValueError:
                raise MalformedStatement(line_no, raw_line) from None
        elif key == "vn":
            # Normals are recomputed downstream from geometry.
            if len(args) < 3:
                raise MalformedStatement(line_no, raw_line)
        elif key == "f":
            if len(args) < 3:
                raise MalformedStatement(line_no, raw_line)
            corners = [
                _parse_corner(tok, len(positions), len(uvs), line_no, raw_line)
                for tok in args
            ]
            for i in range(1, len(corners) - 1):
                tri = (corners[0], corners[i], corners[i + 1])
                faces_pos.append([c[0] for c in tri])
                faces_uv.append([c[1] for c in tri])
        elif key in ("o", "g"):
            if args and not mesh_name:
                mesh_name = args[0]
        elif key in ("usemtl", "mtllib", "s"):
            pass
        else:
            raise MalformedStatement(line_no, raw_line)

    return IndexedMesh(
        np.array(positions, dtype=np.float64).reshape(-1, 3),
        np.array(uvs, dtype=np.float64).reshape(-1, 2),
        np.array(faces_pos, dtype=np.int64).reshape(-1, 3),
        np.array(faces_uv, dtype=np.int64).reshape(-1, 3),
        name=mesh_name,
    )


def write_obj(mesh):
    """Serialize a mesh to OBJ text; parse(write(m)) is index-identical.

    Floats are printed with repr-level precision (17 significant digits) so a
    round trip is exact at float64.
    """
    out = ["# meshqa OBJ export"]
    if mesh.name:
        out.append(f"o {mesh.name}")
    for p in mesh.positions:
        out.append("v {:.17g} {:.17g} {:.17g}".format(p[0], p[1], p[2]))
    for t in mesh.uvs:
        out.append("vt {:.17g} {:.17g}".format(t[0], t[1]))
    for fp, fu in zip(mesh.faces_pos, mesh.faces_uv):
        corners = []
        for vi, ti in zip(fp, fu):
            if ti == NO_UV:
                corners.append(str(vi + 1))
            else:
                corners.append(f"{vi + 1}/{ti + 1}")
        out.append("f " + " ".join(corners))
    return "\n".join(out) + "\n"
