"""Camera placement: bounding-sphere framing and ring viewpoints."""

import math

import numpy as np

from ..errors import EmptyMesh
from .config import Viewpoint

FRAME_FILL = 0.85  # silhouette fraction of the smaller image dimension


def bounding_sphere(mesh):
    """(center, radius) of the AABB-centered bounding sphere."""
    if mesh.n_vertices == 0:
        raise EmptyMesh("mesh has no vertices")
    lo = mesh.positions.min(axis=0)
    hi = mesh.positions.max(axis=0)
    center = 0.5 * (lo + hi)
    radius = float(np.linalg.norm(mesh.positions - center, axis=1).max())
    return center, max(radius, 1e-12)


def frame_model(mesh, config, azimuth_deg=0.0, elevation_deg=0.0):
    """Viewpoint whose distance makes the bounding sphere fill FRAME_FILL
    of the smaller image dimension.

    The projected silhouette of a sphere with radius r seen from distance d
    has pixel radius f * r / sqrt(d^2 - r^2) with f the focal length in
    pixels, so d/r = sqrt(1 + (f/R)^2) for a target pixel radius R.
    """
    bounding_sphere(mesh)  # raises EmptyMesh; distance is model-independent
    focal_px = (config.height / 2.0) / math.tan(math.radians(config.fov_deg) / 2.0)
    target_px = FRAME_FILL * min(config.width, config.height) / 2.0
    distance = math.sqrt(1.0 + (focal_px / target_px) ** 2)
    return Viewpoint(azimuth_deg, elevation_deg, distance)


def ring_viewpoints(n, distance=3.0, main_azimuth_deg=0.0):
    """n viewpoints at elevation 0, azimuths evenly spaced from the main one."""
    if n < 1:
        raise ValueError("need at least one viewpoint")
    return [
        Viewpoint(main_azimuth_deg + 360.0 * k / n, 0.0, distance) for k in range(n)
    ]


def _direction(azimuth_deg, elevation_deg):
    az = math.radians(azimuth_deg)
    el = math.radians(elevation_deg)
    return np.array(
        [math.cos(el) * math.sin(az), math.sin(el), math.cos(el) * math.cos(az)]
    )


def camera_frame(mesh, viewpoint):
    """(eye, center, radius) in world units for a viewpoint on the sphere."""
    center, radius = bounding_sphere(mesh)
    eye = center + _direction(viewpoint.azimuth_deg, viewpoint.elevation_deg) * (
        viewpoint.distance * radius
    )
    return eye, center, radius


def look_at(eye, target, up=(0.0, 1.0, 0.0)):
    """Right-handed view matrix (4x4); camera looks down -Z."""
    eye = np.asarray(eye, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    forward = target - eye
    forward = forward / np.linalg.norm(forward)
    up = np.asarray(up, dtype=np.float64)
    if abs(np.dot(forward, up)) > 0.999:  # looking straight up/down
        up = np.array([0.0, 0.0, 1.0])
    right = np.cross(forward, up)
    right /= np.linalg.norm(right)
    true_up = np.cross(right, forward)
    view = np.eye(4)
    view[0, :3] = right
    view[1, :3] = true_up
    view[2, :3] = -forward
    view[:3, 3] = -view[:3, :3] @ eye
    return view


def perspective(fov_deg, aspect, near, far):
    f = 1.0 / math.tan(math.radians(fov_deg) / 2.0)
    proj = np.zeros((4, 4))
    proj[0, 0] = f / aspect
    proj[1, 1] = f
    proj[2, 2] = (far + near) / (near - far)
    proj[2, 3] = 2.0 * far * near / (near - far)
    proj[3, 2] = -1.0
    return proj
