"""Mass properties of the primitive bodies.

Every function returns ``(com_local, inertia)``: the centre of mass in the
body frame and the 3x3 inertia tensor about the centre of mass, body axes.
Axisymmetric bodies use +z as the symmetry axis.
"""
from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate


def _diag(ixx: float, iyy: float, izz: float) -> np.ndarray:
    return np.diag([ixx, iyy, izz]).astype(float)


def axisymmetric(m, z_lo, z_hi, outer, inner=lambda z: 0.0, breakpoints=()):
    """Mass properties of a solid of revolution sliced along z.

    ``outer(z)`` and ``inner(z)`` give the annulus radii of the slice at
    height z. Density is uniform and scaled so the total mass is ``m``.
    """
    pts = sorted(p for p in breakpoints if z_lo < p < z_hi) or None

    def quad(f):
        # quadpack reports roundoff near the tangent ends of spherical slices
        # even though the result is good to ~1e-12
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            return integrate.quad(f, z_lo, z_hi, points=pts, limit=200, epsabs=0.0, epsrel=1e-12)[0]

    def area(z):
        return math.pi * (outer(z) ** 2 - inner(z) ** 2)

    vol = quad(area)
    if vol <= 0:
        raise ValueError("body has no material")
    rho = m / vol
    zc = rho * quad(lambda z: z * area(z)) / m
    izz = rho * quad(lambda z: 0.5 * math.pi * (outer(z) ** 4 - inner(z) ** 4))
    ixx0 = rho * quad(lambda z: 0.25 * math.pi * (outer(z) ** 4 - inner(z) ** 4) + z * z * area(z))
    ixx = ixx0 - m * zc * zc
    return np.array([0.0, 0.0, zc]), _diag(ixx, ixx, izz)


def _disk(radius):
    def f(z):
        return math.sqrt(max(radius * radius - z * z, 0.0))

    return f


def sphere(r, m):
    i = 0.4 * m * r * r
    return np.zeros(3), _diag(i, i, i)


def hemisphere(r, m):
    # flat face on z = 0, dome towards +z
    zc = 3.0 * r / 8.0
    ixx = 0.4 * m * r * r - m * zc * zc
    return np.array([0.0, 0.0, zc]), _diag(ixx, ixx, 0.4 * m * r * r)


def bowl(r, h_c, t, m):
    """Sphere (or shell of thickness t) cut by the plane z = h_c, keeping z <= h_c."""
    outer = _disk(r)
    inner = _disk(r - t) if t > 0 else (lambda z: 0.0)
    return axisymmetric(m, -r, h_c, outer, inner, breakpoints=(-(r - t), r - t, 0.0))


def sphere_with_hole(r, r_h, p_h, t, m):
    """Sphere (or shell of thickness t) with a spherical hole of radius r_h at z = p_h."""
    outer = _disk(r)
    cavity = _disk(r - t) if t > 0 else (lambda z: 0.0)

    def inner(z):
        dz = z - p_h
        hole = math.sqrt(max(r_h * r_h - dz * dz, 0.0))
        return max(cavity(z), hole)

    bps = (p_h - r_h, p_h + r_h, -(r - t), r - t)
    return axisymmetric(m, -r, r, outer, inner, breakpoints=bps)


def cylinder(r, h, m):
    return np.zeros(3), _diag(m * (3 * r * r + h * h) / 12.0, m * (3 * r * r + h * h) / 12.0, 0.5 * m * r * r)


def disc(r, m):
    return np.zeros(3), _diag(0.25 * m * r * r, 0.25 * m * r * r, 0.5 * m * r * r)


def polygonal_prism(n, r, h, m):
    izz = m * r * r / 6.0 * (1.0 + 2.0 * math.cos(math.pi / n) ** 2)
    ixx = 0.5 * izz + m * h * h / 12.0
    return np.zeros(3), _diag(ixx, ixx, izz)


def bar(w, l, h, m):
    return np.zeros(3), _diag(m * (l * l + h * h) / 12.0, m * (w * w + h * h) / 12.0, m * (w * w + l * l) / 12.0)


def triangular_prism(alpha_L, alpha_R, m, height=1.0, depth=1.0):
    """Wedge with apex at (0, 0, height); cross-section in the x-z plane, extruded along y."""
    verts = np.array(
        [[0.0, height], [-height / math.tan(alpha_L), 0.0], [height / math.tan(alpha_R), 0.0]]
    )
    c = verts.mean(axis=0)
    p = verts - c
    x, z = p[:, 0], p[:, 1]
    # second moments of a uniform triangle about its centroid, per unit area
    sxx = (x @ x + x[0] * x[1] + x[1] * x[2] + x[2] * x[0]) / 6.0
    szz = (z @ z + z[0] * z[1] + z[1] * z[2] + z[2] * z[0]) / 6.0
    sxz = (2 * x @ z + x[0] * z[1] + x[1] * z[0] + x[1] * z[2] + x[2] * z[1] + x[2] * z[0] + x[0] * z[2]) / 12.0
    d2 = depth * depth / 12.0
    ixx = m * (szz + d2)
    iyy = m * (sxx + szz)
    izz = m * (sxx + d2)
    ixz = -m * sxz
    tensor = np.array([[ixx, 0.0, ixz], [0.0, iyy, 0.0], [ixz, 0.0, izz]])
    return np.array([c[0], 0.0, c[1]]), tensor


def point():
    return np.zeros(3), np.zeros((3, 3))


def mass_properties(kind: str, params: dict, **geometry):
    """Dispatch on a body kind; ``geometry`` carries non-randomizable extents."""
    p = params
    if kind in ("mass", "pulley", "rocket", "plane"):
        return point()
    if kind == "sphere":
        return sphere(p["r"], p["m"])
    if kind == "hemisphere":
        return hemisphere(p["r"], p["m"])
    if kind == "bowl":
        return bowl(p["r"], p["h_c"], p["t"], p["m"])
    if kind == "sphere_with_hole":
        return sphere_with_hole(p["r"], p["r_h"], p["p_h"], p["t"], p["m"])
    if kind == "cylinder":
        return cylinder(p["r"], p["h"], p["m"])
    if kind == "disc":
        return disc(p["r"], p["m"])
    if kind == "polygonal_prism":
        return polygonal_prism(int(p["n"]), p["r"], p["h"], p["m"])
    if kind == "bar":
        return bar(p["w"], p["l"], p["h"], p["m"])
    if kind == "triangular_prism":
        return triangular_prism(p["alpha_L"], p["alpha_R"], p["m"], **geometry)
    raise KeyError(f"no mass properties for body kind {kind!r}")
