"""Vectorized element kernels (pure numpy).

Every function works on a batch of ``ne`` flat triangles at once. Element
degree-of-freedom order is (u, v, w, rx, ry, rz) per node, nodes 0..2.

Two membrane formulations are available:

* ``MEMBRANE_ALLMAN`` (default) -- quadratic-displacement triangle whose
  midside displacements follow from the corner drilling rotations, with a
  penalty on (mean rz - centroid rotation) against its one spurious mode.
* ``MEMBRANE_CST`` -- constant-strain triangle with a penalty on
  (rz_i - element rotation) at every node.
"""

import numpy as np

# interior 3-point rule, exact for quadratics
GAUSS_XI = np.array([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0])
GAUSS_ETA = np.array([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0])

# sides opposite-ordered as in the DKT literature: 23, 31, 12
_SIDE_I = np.array([1, 2, 0])
_SIDE_J = np.array([2, 0, 1])

_MEMBRANE = np.array([0, 1, 6, 7, 12, 13])
_BENDING = np.array([2, 3, 4, 8, 9, 10, 14, 15, 16])
_DRILL = np.array([5, 11, 17])
_ALLMAN = np.array([0, 1, 5, 6, 7, 11, 12, 13, 17])

MEMBRANE_ALLMAN = 0
MEMBRANE_CST = 1


def shape_derivatives(xi, eta):
    """d/dxi and d/deta of the six quadratic shape functions."""
    l1 = 1.0 - xi - eta
    dxi = np.array([1.0 - 4.0 * l1, 4.0 * xi - 1.0, 0.0,
                    4.0 * eta, -4.0 * eta, 4.0 * (l1 - xi)])
    deta = np.array([1.0 - 4.0 * l1, 0.0, 4.0 * eta - 1.0,
                     4.0 * xi, 4.0 * (l1 - eta), -4.0 * xi])
    return dxi, deta


def local_frames(coords):
    """Rotation matrices (rows e1, e2, e3), in-plane coordinates and areas.

    coords : (ne, 3, 3) node positions.
    """
    d1 = coords[:, 1] - coords[:, 0]
    d2 = coords[:, 2] - coords[:, 0]
    e1 = d1 / np.linalg.norm(d1, axis=1)[:, None]
    n = np.cross(d1, d2)
    nn = np.linalg.norm(n, axis=1)
    e3 = n / nn[:, None]
    e2 = np.cross(e3, e1)
    R = np.stack([e1, e2, e3], axis=1)
    rel = coords - coords[:, :1]
    xy = np.einsum("eij,enj->eni", R[:, :2], rel)
    return R, xy, 0.5 * nn


def _dkt_coefficients(xy):
    """Matrices Cx, Cy (ne, 9, 6) with Hx = Cx @ N and Hy = Cy @ N."""
    ne = len(xy)
    xij = xy[:, _SIDE_I, 0] - xy[:, _SIDE_J, 0]
    yij = xy[:, _SIDE_I, 1] - xy[:, _SIDE_J, 1]
    l2 = xij**2 + yij**2
    a = -xij / l2
    b = 0.75 * xij * yij / l2
    c = (0.25 * xij**2 - 0.5 * yij**2) / l2
    d = -yij / l2
    e = (0.25 * yij**2 - 0.5 * xij**2) / l2
    Cx = np.zeros((ne, 9, 6))
    Cy = np.zeros((ne, 9, 6))
    for n in range(3):
        sp, sm = (n + 2) % 3, (n + 1) % 3
        mp, mm = 3 + sp, 3 + sm
        r = 3 * n
        Cx[:, r, mp] = 1.5 * a[:, sp]
        Cx[:, r, mm] = -1.5 * a[:, sm]
        Cx[:, r + 1, mp] = b[:, sp]
        Cx[:, r + 1, mm] = b[:, sm]
        Cx[:, r + 2, n] = 1.0
        Cx[:, r + 2, mp] = -c[:, sp]
        Cx[:, r + 2, mm] = -c[:, sm]
        Cy[:, r, mp] = 1.5 * d[:, sp]
        Cy[:, r, mm] = -1.5 * d[:, sm]
        Cy[:, r + 1, n] = -1.0
        Cy[:, r + 1, mp] = e[:, sp]
        Cy[:, r + 1, mm] = e[:, sm]
        Cy[:, r + 2] = -Cx[:, r + 1]
    return Cx, Cy


def _dkt_curvature_matrix(xy, Cx, Cy, xi, eta):
    """B (ne, 3, 9) mapping bending dofs to (k_xx, k_yy, 2 k_xy)."""
    dxi, deta = shape_derivatives(xi, eta)
    x21 = xy[:, 1, 0] - xy[:, 0, 0]
    y21 = xy[:, 1, 1] - xy[:, 0, 1]
    x31 = xy[:, 2, 0] - xy[:, 0, 0]
    y31 = xy[:, 2, 1] - xy[:, 0, 1]
    det = x21 * y31 - x31 * y21
    hx_xi, hx_eta = Cx @ dxi, Cx @ deta
    hy_xi, hy_eta = Cy @ dxi, Cy @ deta
    inv = (1.0 / det)[:, None]
    hx_x = inv * (y31[:, None] * hx_xi - y21[:, None] * hx_eta)
    hx_y = inv * (-x31[:, None] * hx_xi + x21[:, None] * hx_eta)
    hy_x = inv * (y31[:, None] * hy_xi - y21[:, None] * hy_eta)
    hy_y = inv * (-x31[:, None] * hy_xi + x21[:, None] * hy_eta)
    return np.stack([hx_x, hy_y, hx_y + hy_x], axis=1)


def _membrane_matrix(xy, area):
    """CST strain matrix (ne, 3, 6) and in-plane rotation row (ne, 6)."""
    x, y = xy[:, :, 0], xy[:, :, 1]
    bi = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    ci = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    ne = len(xy)
    B = np.zeros((ne, 3, 6))
    inv2a = (0.5 / area)[:, None]
    B[:, 0, 0::2] = bi * inv2a
    B[:, 1, 1::2] = ci * inv2a
    B[:, 2, 0::2] = ci * inv2a
    B[:, 2, 1::2] = bi * inv2a
    # omega = (dv/dx - du/dy) / 2
    W = np.zeros((ne, 6))
    W[:, 1::2] = 0.5 * bi * inv2a
    W[:, 0::2] = -0.5 * ci * inv2a
    return B, W


def _jacobian_terms(xy):
    x21 = xy[:, 1, 0] - xy[:, 0, 0]
    y21 = xy[:, 1, 1] - xy[:, 0, 1]
    x31 = xy[:, 2, 0] - xy[:, 0, 0]
    y31 = xy[:, 2, 1] - xy[:, 0, 1]
    return x21, y21, x31, y31, 1.0 / (x21 * y31 - x31 * y21)


def _allman_transform(xy):
    """(ne, 12, 9) map from (u, v, rz) per corner to the six-node u, v dofs."""
    ne = len(xy)
    T = np.zeros((ne, 12, 9))
    for a in range(3):
        T[:, 2 * a, 3 * a] = 1.0
        T[:, 2 * a + 1, 3 * a + 1] = 1.0
    for s in range(3):
        i, j = _SIDE_I[s], _SIDE_J[s]
        dx = xy[:, j, 0] - xy[:, i, 0]
        dy = xy[:, j, 1] - xy[:, i, 1]
        r = 6 + 2 * s
        for k in (i, j):
            T[:, r, 3 * k] = 0.5
            T[:, r + 1, 3 * k + 1] = 0.5
        # outward normal times length / 8, times (rz_j - rz_i)
        T[:, r, 3 * j + 2] = dy / 8.0
        T[:, r, 3 * i + 2] = -dy / 8.0
        T[:, r + 1, 3 * j + 2] = -dx / 8.0
        T[:, r + 1, 3 * i + 2] = dx / 8.0
    return T


def _lst_matrices(xy, xi, eta):
    """Six-node strain matrix (ne, 3, 12) and rotation row (ne, 12) at a point."""
    dxi, deta = shape_derivatives(xi, eta)
    x21, y21, x31, y31, inv = _jacobian_terms(xy)
    dx = inv[:, None] * (y31[:, None] * dxi - y21[:, None] * deta)
    dy = inv[:, None] * (-x31[:, None] * dxi + x21[:, None] * deta)
    ne = len(xy)
    B = np.zeros((ne, 3, 12))
    B[:, 0, 0::2] = dx
    B[:, 1, 1::2] = dy
    B[:, 2, 0::2] = dy
    B[:, 2, 1::2] = dx
    W = np.zeros((ne, 12))
    W[:, 1::2] = 0.5 * dx
    W[:, 0::2] = -0.5 * dy
    return B, W


def _allman_stiffness(xy, area, thickness, Dp, G, drill_ratio):
    """(ne, 9, 9) over (u, v, rz) per corner."""
    T = _allman_transform(xy)
    k = np.zeros((len(xy), 12, 12))
    for xi, eta in zip(GAUSS_XI, GAUSS_ETA):
        B, _ = _lst_matrices(xy, xi, eta)
        k += np.einsum("eai,ab,ebj->eij", B, Dp, B)
    k *= (thickness * area / 3.0)[:, None, None]
    k = np.matmul(T.transpose(0, 2, 1), np.matmul(k, T))
    _, W = _lst_matrices(xy, 1.0 / 3.0, 1.0 / 3.0)
    P = -np.einsum("ek,eki->ei", W, T)
    P[:, 2::3] += 1.0 / 3.0
    kd = drill_ratio * G * thickness * area
    return k + kd[:, None, None] * np.einsum("ei,ej->eij", P, P)


def _plane_stress(E, nu):
    return E / (1.0 - nu * nu) * np.array([[1.0, nu, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, 0.5 * (1.0 - nu)]])


def _transformation(R):
    ne = len(R)
    T = np.zeros((ne, 18, 18))
    for k in range(6):
        T[:, 3 * k:3 * k + 3, 3 * k:3 * k + 3] = R
    return T


def element_stiffness(coords, thickness, E, nu, drill_ratio, membrane=MEMBRANE_ALLMAN):
    """Global-frame 18x18 stiffness for each element, shape (ne, 18, 18)."""
    coords = np.ascontiguousarray(coords, dtype=float)
    thickness = np.asarray(thickness, dtype=float)
    R, xy, area = local_frames(coords)
    Dp = _plane_stress(E, nu)
    G = E / (2.0 * (1.0 + nu))
    ne = len(coords)

    Cx, Cy = _dkt_coefficients(xy)
    kb = np.zeros((ne, 9, 9))
    for xi, eta in zip(GAUSS_XI, GAUSS_ETA):
        Bb = _dkt_curvature_matrix(xy, Cx, Cy, xi, eta)
        kb += np.einsum("eai,ab,ebj->eij", Bb, Dp, Bb)
    kb *= (thickness**3 / 12.0 * area / 3.0)[:, None, None]

    K = np.zeros((ne, 18, 18))
    if membrane == MEMBRANE_ALLMAN:
        K[:, _ALLMAN[:, None], _ALLMAN[None, :]] = _allman_stiffness(xy, area, thickness, Dp, G, drill_ratio)
    else:
        Bm, W = _membrane_matrix(xy, area)
        km = np.einsum("eai,ab,ebj->eij", Bm, Dp, Bm) * (thickness * area)[:, None, None]
        # drilling penalty on (rz_i - omega) at each node
        P = np.zeros((ne, 3, 18))
        P[:, :, _MEMBRANE] = -W[:, None, :]
        P[:, [0, 1, 2], _DRILL] = 1.0
        K += np.einsum("eai,eaj->eij", P, P) * (drill_ratio * G * thickness * area / 3.0)[:, None, None]
        K[:, _MEMBRANE[:, None], _MEMBRANE[None, :]] += km
    K[:, _BENDING[:, None], _BENDING[None, :]] += kb
    # T^T K T with T = blockdiag(R): rotate each 3x3 block
    blocks = K.reshape(ne, 6, 3, 6, 3).transpose(0, 1, 3, 2, 4)
    Rb = R[:, None, None]
    out = np.matmul(np.matmul(Rb.transpose(0, 1, 2, 4, 3), blocks), Rb)
    return out.transpose(0, 1, 3, 2, 4).reshape(ne, 18, 18)


def element_stress(coords, thickness, E, nu, ue, membrane=MEMBRANE_ALLMAN):
    """Centroidal membrane stress, surface bending stress and von Mises.

    ue : (ne, 18) global element displacement vectors.
    Returns (von_mises (ne,), membrane (ne, 3), bending (ne, 3)); stresses are
    (s_xx, s_yy, s_xy) in each element's local frame, bending at the +z face.
    """
    coords = np.ascontiguousarray(coords, dtype=float)
    thickness = np.asarray(thickness, dtype=float)
    R, xy, area = local_frames(coords)
    T = _transformation(R)
    ul = np.einsum("eij,ej->ei", T, ue)
    Dp = _plane_stress(E, nu)
    if membrane == MEMBRANE_ALLMAN:
        B, _ = _lst_matrices(xy, 1.0 / 3.0, 1.0 / 3.0)
        Bm = np.einsum("eak,eki->eai", B, _allman_transform(xy))
        sm = np.einsum("ab,ebj,ej->ea", Dp, Bm, ul[:, _ALLMAN])
    else:
        Bm, _ = _membrane_matrix(xy, area)
        sm = np.einsum("ab,ebj,ej->ea", Dp, Bm, ul[:, _MEMBRANE])
    Cx, Cy = _dkt_coefficients(xy)
    Bb = _dkt_curvature_matrix(xy, Cx, Cy, 1.0 / 3.0, 1.0 / 3.0)
    kappa = np.einsum("eaj,ej->ea", Bb, ul[:, _BENDING])
    sb = 0.5 * thickness[:, None] * (kappa @ Dp.T)
    vm = np.maximum(_von_mises(sm + sb), _von_mises(sm - sb))
    return vm, sm, sb


def _von_mises(s):
    sx, sy, txy = s[:, 0], s[:, 1], s[:, 2]
    return np.sqrt(np.maximum(sx * sx - sx * sy + sy * sy + 3.0 * txy * txy, 0.0))
