"""Procedural meshes and textures for demos and tests."""

import numpy as np

from .assets.image import TextureImage
from .assets.mesh import IndexedMesh


def uv_sphere(n_lat=32, n_lon=48, radius=1.0, center=(0.0, 0.0, 0.0), name="sphere"):
    """Lat-lon sphere with a full UV atlas; poles use degenerate-free fans."""
    lat = np.linspace(0.0, np.pi, n_lat + 1)
    lon = np.linspace(0.0, 2.0 * np.pi, n_lon + 1)
    theta, phi = np.meshgrid(lat, lon, indexing="ij")
    x = np.sin(theta) * np.cos(phi)
    y = np.cos(theta)
    z = np.sin(theta) * np.sin(phi)
    positions = np.stack([x, y, z], axis=2).reshape(-1, 3) * radius + np.asarray(center)
    u = np.linspace(0.0, 1.0, n_lon + 1)
    v = np.linspace(1.0, 0.0, n_lat + 1)
    vv, uu = np.meshgrid(v, u, indexing="ij")
    uvs = np.stack([uu, vv], axis=2).reshape(-1, 2)

    def vid(i, j):
        return i * (n_lon + 1) + j

    faces = []
    for i in range(n_lat):
        for j in range(n_lon):
            a, b_, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            if i > 0:
                faces.append([a, b_, d])
            if i < n_lat - 1:
                faces.append([b_, c, d])
    faces = np.array(faces, dtype=np.int64)
    return IndexedMesh(positions, uvs, faces, faces.copy(), name=name)


def bumpy_sphere(n_lat=32, n_lon=48, amplitude=0.08, seed=0, name="bumpy"):
    """Sphere with radial displacement noise; strictly rougher than uv_sphere."""
    mesh = uv_sphere(n_lat, n_lon, name=name)
    rng = np.random.default_rng(seed)
    norms = np.linalg.norm(mesh.positions, axis=1, keepdims=True)
    radial = mesh.positions / np.where(norms > 0, norms, 1.0)
    # grid duplicates (seam column, pole rows) must displace together
    key = np.round(mesh.positions, 9)
    _, inv = np.unique(key, axis=0, return_inverse=True)
    per_unique = rng.normal(0.0, amplitude, size=inv.max() + 1)
    mesh.positions = mesh.positions + radial * per_unique[inv][:, None]
    return mesh


def unit_quad(name="quad"):
    """Single quad (two triangles) in the XY plane facing +Z, UV-mapped."""
    positions = np.array(
        [[-0.5, -0.5, 0.0], [0.5, -0.5, 0.0], [0.5, 0.5, 0.0], [-0.5, 0.5, 0.0]]
    )
    uvs = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    faces = np.array([[0, 1, 2], [0, 2, 3]], dtype=np.int64)
    return IndexedMesh(positions, uvs, faces, faces.copy(), name=name)


def checkerboard(side=256, block=32, bright=230, dark=30):
    yy, xx = np.mgrid[0:side, 0:side]
    cells = ((yy // block) + (xx // block)) % 2
    gray = np.where(cells == 0, dark, bright).astype(np.uint8)
    return TextureImage(np.repeat(gray[:, :, None], 3, axis=2))


def gradient_texture(side=256):
    ramp = np.linspace(0, 255, side).astype(np.uint8)
    data = np.stack(
        [
            np.tile(ramp, (side, 1)),
            np.tile(ramp[::-1], (side, 1)).T,
            np.full((side, side), 128, dtype=np.uint8),
        ],
        axis=2,
    )
    return TextureImage(data)
