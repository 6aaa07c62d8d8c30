"""Uniform quantization of vertex positions and UV coordinates."""

import math
import warnings

import numpy as np


def _snap(values, vmin, vrange, bits):
    steps = (1 << bits) - 1
    normalized = (values - vmin) / vrange
    return vmin + np.round(normalized * steps) * (vrange / steps)


def quantize_positions(mesh, bits):
    """Snap each position component to a 2^bits grid.

    The grid pitch uses the longest AABB extent on all three axes, so the
    quantization error bound is identical per axis. A zero-extent mesh (a
    point) is returned unchanged with quantization_warning set.
    """
    if not 1 <= bits <= 30:
        raise ValueError(f"position bits out of range: {bits}")
    out = mesh.copy()
    if mesh.n_vertices == 0:
        return out
    vmin = mesh.positions.min(axis=0)
    extent = float((mesh.positions.max(axis=0) - vmin).max())
    if extent == 0.0:
        warnings.warn("degenerate AABB: positions left unquantized")
        out.quantization_warning = True
        return out
    out.positions = _snap(mesh.positions, vmin, extent, bits)
    return out


def quantize_uvs(mesh, bits):
    """Snap UVs to a 2^bits grid over [0,1]; inputs are clamped first."""
    if not 1 <= bits <= 30:
        raise ValueError(f"uv bits out of range: {bits}")
    out = mesh.copy()
    if mesh.n_uvs == 0:
        return out
    out.uvs = _snap(np.clip(mesh.uvs, 0.0, 1.0), 0.0, 1.0, bits)
    return out


def estimate_mesh_bytes(mesh, qp, qt):
    """Upper-bound byte estimate for a quantized, entropy-coded mesh stream.

    ceil(V*3*qp/8) position bits + ceil(Vuv*2*qt/8) uv bits +
    ceil(F*2/8) connectivity bits + 64 header bytes. Documented as a proxy;
    a real entropy coder lands below this.
    """
    v = mesh.n_vertices
    vuv = mesh.n_uvs
    f = mesh.n_faces
    return (
        math.ceil(v * 3 * qp / 8)
        + math.ceil(vuv * 2 * qt / 8)
        + math.ceil(f * 2 / 8)
        + 64
    )
