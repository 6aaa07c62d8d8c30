"""Z-buffered software rasterizer with perspective-correct texturing.

Deterministic by construction: triangles are processed in index order with a
strict depth test, so exact depth ties go to the lower triangle index. Shading
never touches the coverage mask.
"""

import numpy as np

from ..assets.image import CoverageMask, TextureImage
from ..errors import EmptyMesh, NoUVs
from .camera import camera_frame, frame_model, look_at, perspective


def vertex_normals(mesh):
    """Per-position normals from area-weighted face normal averaging."""
    normals = np.zeros((mesh.n_vertices, 3))
    p = mesh.positions[mesh.faces_pos]
    face_n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])  # length = 2*area
    for corner in range(3):
        np.add.at(normals, mesh.faces_pos[:, corner], face_n)
    lengths = np.linalg.norm(normals, axis=1, keepdims=True)
    return normals / np.where(lengths > 1e-20, lengths, 1.0)


def _halve(level):
    h, w = level.shape[:2]
    if h > 1 and h % 2:
        level = np.concatenate([level, level[-1:]], axis=0)
    if w > 1 and w % 2:
        level = np.concatenate([level, level[:, -1:]], axis=1)
    h, w = level.shape[:2]
    if h > 1 and w > 1:
        return level.reshape(h // 2, 2, w // 2, 2, -1).mean(axis=(1, 3))
    if h > 1:
        return level.reshape(h // 2, 2, 1, -1).mean(axis=1)
    return level.reshape(1, w // 2, 2, -1).mean(axis=2)


def _mipchain_float(data):
    levels = [data.astype(np.float64)]
    while max(levels[-1].shape[0], levels[-1].shape[1]) > 1:
        levels.append(_halve(levels[-1]))
    return levels


def build_mipchain(texture):
    """Successive 2x box-filtered levels down to 1x1 (level 0 = input)."""
    return [
        TextureImage(np.clip(np.rint(lvl), 0, 255).astype(np.uint8), texture.colorspace)
        for lvl in _mipchain_float(texture.data)
    ]


def _bilinear(level, u, v, wrap):
    h, w = level.shape[:2]
    tx = u * w - 0.5
    ty = (1.0 - v) * h - 0.5  # v=0 is the bottom texture row
    x0 = np.floor(tx).astype(np.int64)
    y0 = np.floor(ty).astype(np.int64)
    fx = (tx - x0)[:, None]
    fy = (ty - y0)[:, None]

    def fetch(xi, yi):
        if wrap == "repeat":
            xi = np.mod(xi, w)
            yi = np.mod(yi, h)
        else:
            xi = np.clip(xi, 0, w - 1)
            yi = np.clip(yi, 0, h - 1)
        return level[yi, xi]

    c00 = fetch(x0, y0)
    c10 = fetch(x0 + 1, y0)
    c01 = fetch(x0, y0 + 1)
    c11 = fetch(x0 + 1, y0 + 1)
    top = c00 * (1 - fx) + c10 * fx
    bot = c01 * (1 - fx) + c11 * fx
    return top * (1 - fy) + bot * fy


def sample_texture(levels, u, v, lod=None, wrap="clamp"):
    """Bilinear (lod None) or trilinear sampling from a float mip chain."""
    if lod is None:
        return _bilinear(levels[0], u, v, wrap)
    lod = np.clip(lod, 0.0, len(levels) - 1.0)
    l0 = np.floor(lod).astype(np.int64)
    frac = (lod - l0)[:, None]
    out = np.zeros((len(u), levels[0].shape[2]))
    for lv in np.unique(l0):
        sel = l0 == lv
        lo = _bilinear(levels[lv], u[sel], v[sel], wrap)
        hi = _bilinear(levels[min(lv + 1, len(levels) - 1)], u[sel], v[sel], wrap)
        out[sel] = lo * (1 - frac[sel]) + hi * frac[sel]
    return out


def render(mesh, texture, config, viewpoint=None):
    """Render to (TextureImage, CoverageMask).

    Per-pixel shade follows the configured material: lambertian is
    clamp(ambient + (1-ambient)*intensity*max(0, n.l)) * albedo, the glossy
    and metallic presets add a Blinn-Phong lobe with exponent
    2^(10*glossiness) whose strength and tint blend with metalness, and
    'unlit' outputs the albedo directly (used by the color measure).
    """
    if mesh.n_faces == 0 or mesh.n_vertices == 0:
        raise EmptyMesh("cannot render an empty mesh")
    if np.any(mesh.faces_uv < 0):
        raise NoUVs("every rendered face needs texture coordinates")
    if viewpoint is None:
        viewpoint = frame_model(mesh, config)

    eye, center, radius = camera_frame(mesh, viewpoint)
    near = max(1e-4 * radius, (viewpoint.distance - 2.0) * radius)
    far = (viewpoint.distance + 2.0) * radius
    view = look_at(eye, center)
    proj = perspective(config.fov_deg, config.width / config.height, near, far)
    mvp = proj @ view

    hom = np.concatenate([mesh.positions, np.ones((mesh.n_vertices, 1))], axis=1)
    clip = hom @ mvp.T
    wc = clip[:, 3]
    safe_w = np.where(np.abs(wc) > 1e-12, wc, 1e-12)
    sx = (clip[:, 0] / safe_w + 1.0) * 0.5 * config.width
    sy = (1.0 - clip[:, 1] / safe_w) * 0.5 * config.height
    inv_w = 1.0 / safe_w

    normals = vertex_normals(mesh)

    height, width = config.height, config.width
    zbuf = np.full((height, width), np.inf)
    mask = np.zeros((height, width), dtype=bool)
    # G-buffer: uv(2), normal(3), world pos(3), uv screen derivatives(4)
    gbuf = np.zeros((height, width, 12))

    fp = mesh.faces_pos
    fu = mesh.faces_uv
    tri_sx, tri_sy = sx[fp], sy[fp]
    tri_w = wc[fp]
    tri_inv_w = inv_w[fp]

    for fi in range(mesh.n_faces):
        if np.any(tri_w[fi] <= near * 0.5):
            continue  # behind the near plane; framed models never hit this
        x = tri_sx[fi]
        y = tri_sy[fi]
        area = (x[1] - x[0]) * (y[2] - y[0]) - (y[1] - y[0]) * (x[2] - x[0])
        if area == 0.0:
            continue
        sign = 1.0 if area > 0 else -1.0
        area_abs = area * sign

        x0 = max(int(np.floor(x.min())), 0)
        x1 = min(int(np.ceil(x.max())), width - 1)
        y0 = max(int(np.floor(y.min())), 0)
        y1 = min(int(np.ceil(y.max())), height - 1)
        if x1 < x0 or y1 < y0:
            continue
        px, py = np.meshgrid(
            np.arange(x0, x1 + 1) + 0.5, np.arange(y0, y1 + 1) + 0.5
        )

        def edge(ax, ay, bx, by):
            return (bx - ax) * (py - ay) - (by - ay) * (px - ax)

        w0 = edge(x[1], y[1], x[2], y[2]) * sign
        w1 = edge(x[2], y[2], x[0], y[0]) * sign
        w2 = edge(x[0], y[0], x[1], y[1]) * sign
        inside = (w0 >= 0) & (w1 >= 0) & (w2 >= 0)
        if not inside.any():
            continue

        b0 = w0[inside] / area_abs
        b1 = w1[inside] / area_abs
        b2 = w2[inside] / area_abs
        bary = np.stack([b0, b1, b2], axis=1)

        iw = bary @ tri_inv_w[fi]
        depth = 1.0 / iw
        rows = py[inside].astype(np.int64)
        cols = px[inside].astype(np.int64)
        closer = depth < zbuf[rows, cols]
        if not closer.any():
            continue
        rows, cols = rows[closer], cols[closer]
        bary = bary[closer]
        iw = iw[closer]
        depth = depth[closer]

        uvw = mesh.uvs[fu[fi]] * tri_inv_w[fi][:, None]  # uv/w at vertices
        nw = normals[fp[fi]] * tri_inv_w[fi][:, None]
        pw = mesh.positions[fp[fi]] * tri_inv_w[fi][:, None]
        uv_pix = (bary @ uvw) / iw[:, None]
        n_pix = (bary @ nw) / iw[:, None]
        p_pix = (bary @ pw) / iw[:, None]

        # screen-space barycentric gradients (affine), for the mip footprint
        gx = np.array([-(y[2] - y[1]), -(y[0] - y[2]), -(y[1] - y[0])]) * sign / area_abs
        gy = np.array([x[2] - x[1], x[0] - x[2], x[1] - x[0]]) * sign / area_abs
        du_dx_num = gx @ uvw  # d(uv/w)/dx, constant over the triangle
        du_dy_num = gy @ uvw
        dw_dx = gx @ tri_inv_w[fi]
        dw_dy = gy @ tri_inv_w[fi]
        num = bary @ uvw
        duv_dx = (du_dx_num[None, :] * iw[:, None] - num * dw_dx) / iw[:, None] ** 2
        duv_dy = (du_dy_num[None, :] * iw[:, None] - num * dw_dy) / iw[:, None] ** 2

        zbuf[rows, cols] = depth
        mask[rows, cols] = True
        gbuf[rows, cols, 0:2] = uv_pix
        gbuf[rows, cols, 2:5] = n_pix
        gbuf[rows, cols, 5:8] = p_pix
        gbuf[rows, cols, 8:10] = duv_dx
        gbuf[rows, cols, 10:12] = duv_dy

    return _shade(mesh, texture, config, eye, mask, gbuf)


def _shade(mesh, texture, config, eye, mask, gbuf):
    height, width = config.height, config.width
    out = np.full((height, width, 3), float(config.background))
    sel = mask
    if sel.any():
        uv = gbuf[sel, 0:2]
        n = gbuf[sel, 2:5]
        wpos = gbuf[sel, 5:8]
        duv_dx = gbuf[sel, 8:10]
        duv_dy = gbuf[sel, 10:12]

        tex = texture.to_rgb()
        levels = _mipchain_float(tex.data)
        lod = None
        if config.mipmap:
            tw, th = tex.width, tex.height
            fx = np.hypot(duv_dx[:, 0] * tw, duv_dx[:, 1] * th)
            fy = np.hypot(duv_dy[:, 0] * tw, duv_dy[:, 1] * th)
            rho = np.maximum(np.maximum(fx, fy), 1e-12)
            lod = np.maximum(np.log2(rho), 0.0)
        u = uv[:, 0]
        v = uv[:, 1]
        if config.uv_wrap == "clamp":
            u = np.clip(u, 0.0, 1.0)
            v = np.clip(v, 0.0, 1.0)
        albedo = sample_texture(levels, u, v, lod, config.uv_wrap) / 255.0

        if config.material == "unlit":
            color = albedo
        else:
            nl = np.linalg.norm(n, axis=1, keepdims=True)
            n = n / np.where(nl > 1e-20, nl, 1.0)
            view_vec = eye[None, :] - wpos
            view_vec /= np.linalg.norm(view_vec, axis=1, keepdims=True)
            flip = np.sum(n * view_vec, axis=1) < 0.0
            n[flip] = -n[flip]
            light = config.light_direction()
            ndl = np.maximum(np.sum(n * light[None, :], axis=1), 0.0)
            shade = np.clip(
                config.ambient + (1.0 - config.ambient) * config.light_intensity * ndl,
                0.0,
                1.0,
            )[:, None]
            if config.material == "lambertian":
                color = shade * albedo
            else:
                m = config.metalness
                half = light[None, :] + view_vec
                half /= np.linalg.norm(half, axis=1, keepdims=True)
                ndh = np.maximum(np.sum(n * half, axis=1), 0.0)
                exponent = 2.0 ** (10.0 * config.glossiness)
                strength = config.light_intensity * (0.25 + 0.75 * m)
                spec = (strength * ndh**exponent)[:, None]
                spec_tint = (1.0 - m) + m * albedo
                color = shade * albedo * (1.0 - m) + spec * spec_tint
        out[sel] = np.clip(color, 0.0, 1.0) * 255.0

    image = TextureImage(np.clip(np.rint(out), 0, 255).astype(np.uint8))
    return image, CoverageMask(mask)
