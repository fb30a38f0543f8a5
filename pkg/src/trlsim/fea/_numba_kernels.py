"""Element kernels compiled with numba.

Same math as ``_numpy_kernels`` written as per-element loops; results agree
with the numpy path to rounding.
"""

import numpy as np
from numba import njit

from ._numpy_kernels import GAUSS_ETA, GAUSS_XI, MEMBRANE_ALLMAN

_MEMBRANE = np.array([0, 1, 6, 7, 12, 13])
_BENDING = np.array([2, 3, 4, 8, 9, 10, 14, 15, 16])
_ALLMAN = np.array([0, 1, 5, 6, 7, 11, 12, 13, 17])


@njit(cache=True)
def _frame(p, R, xy):
    d1 = p[1] - p[0]
    d2 = p[2] - p[0]
    l1 = np.sqrt(d1[0] ** 2 + d1[1] ** 2 + d1[2] ** 2)
    n0 = d1[1] * d2[2] - d1[2] * d2[1]
    n1 = d1[2] * d2[0] - d1[0] * d2[2]
    n2 = d1[0] * d2[1] - d1[1] * d2[0]
    nn = np.sqrt(n0 * n0 + n1 * n1 + n2 * n2)
    for k in range(3):
        R[0, k] = d1[k] / l1
    R[2, 0] = n0 / nn
    R[2, 1] = n1 / nn
    R[2, 2] = n2 / nn
    R[1, 0] = R[2, 1] * R[0, 2] - R[2, 2] * R[0, 1]
    R[1, 1] = R[2, 2] * R[0, 0] - R[2, 0] * R[0, 2]
    R[1, 2] = R[2, 0] * R[0, 1] - R[2, 1] * R[0, 0]
    for a in range(3):
        for i in range(2):
            s = 0.0
            for k in range(3):
                s += R[i, k] * (p[a, k] - p[0, k])
            xy[a, i] = s
    return 0.5 * nn


@njit(cache=True)
def _dkt_coeffs(xy, Cx, Cy):
    a = np.empty(3)
    b = np.empty(3)
    c = np.empty(3)
    d = np.empty(3)
    e = np.empty(3)
    for s in range(3):
        i = (s + 1) % 3
        j = (s + 2) % 3
        xij = xy[i, 0] - xy[j, 0]
        yij = xy[i, 1] - xy[j, 1]
        l2 = xij * xij + yij * yij
        a[s] = -xij / l2
        b[s] = 0.75 * xij * yij / l2
        c[s] = (0.25 * xij * xij - 0.5 * yij * yij) / l2
        d[s] = -yij / l2
        e[s] = (0.25 * yij * yij - 0.5 * xij * xij) / l2
    Cx[:, :] = 0.0
    Cy[:, :] = 0.0
    for n in range(3):
        sp = (n + 2) % 3
        sm = (n + 1) % 3
        mp = 3 + sp
        mm = 3 + sm
        r = 3 * n
        Cx[r, mp] = 1.5 * a[sp]
        Cx[r, mm] = -1.5 * a[sm]
        Cx[r + 1, mp] = b[sp]
        Cx[r + 1, mm] = b[sm]
        Cx[r + 2, n] = 1.0
        Cx[r + 2, mp] = -c[sp]
        Cx[r + 2, mm] = -c[sm]
        Cy[r, mp] = 1.5 * d[sp]
        Cy[r, mm] = -1.5 * d[sm]
        Cy[r + 1, n] = -1.0
        Cy[r + 1, mp] = e[sp]
        Cy[r + 1, mm] = e[sm]
        for k in range(6):
            Cy[r + 2, k] = -Cx[r + 1, k]


@njit(cache=True)
def _curvature(xy, Cx, Cy, xi, eta, B):
    l1 = 1.0 - xi - eta
    dxi = np.array([1.0 - 4.0 * l1, 4.0 * xi - 1.0, 0.0, 4.0 * eta, -4.0 * eta, 4.0 * (l1 - xi)])
    deta = np.array([1.0 - 4.0 * l1, 0.0, 4.0 * eta - 1.0, 4.0 * xi, 4.0 * (l1 - eta), -4.0 * xi])
    x21 = xy[1, 0] - xy[0, 0]
    y21 = xy[1, 1] - xy[0, 1]
    x31 = xy[2, 0] - xy[0, 0]
    y31 = xy[2, 1] - xy[0, 1]
    inv = 1.0 / (x21 * y31 - x31 * y21)
    for r in range(9):
        hx_xi = 0.0
        hx_eta = 0.0
        hy_xi = 0.0
        hy_eta = 0.0
        for k in range(6):
            hx_xi += Cx[r, k] * dxi[k]
            hx_eta += Cx[r, k] * deta[k]
            hy_xi += Cy[r, k] * dxi[k]
            hy_eta += Cy[r, k] * deta[k]
        hx_x = inv * (y31 * hx_xi - y21 * hx_eta)
        hx_y = inv * (-x31 * hx_xi + x21 * hx_eta)
        hy_x = inv * (y31 * hy_xi - y21 * hy_eta)
        hy_y = inv * (-x31 * hy_xi + x21 * hy_eta)
        B[0, r] = hx_x
        B[1, r] = hy_y
        B[2, r] = hx_y + hy_x


@njit(cache=True)
def _membrane(xy, area, Bm, W):
    b0 = xy[1, 1] - xy[2, 1]
    b1 = xy[2, 1] - xy[0, 1]
    b2 = xy[0, 1] - xy[1, 1]
    c0 = xy[2, 0] - xy[1, 0]
    c1 = xy[0, 0] - xy[2, 0]
    c2 = xy[1, 0] - xy[0, 0]
    bi = (b0, b1, b2)
    ci = (c0, c1, c2)
    f = 0.5 / area
    Bm[:, :] = 0.0
    for i in range(3):
        Bm[0, 2 * i] = bi[i] * f
        Bm[1, 2 * i + 1] = ci[i] * f
        Bm[2, 2 * i] = ci[i] * f
        Bm[2, 2 * i + 1] = bi[i] * f
        W[2 * i + 1] = 0.5 * bi[i] * f
        W[2 * i] = -0.5 * ci[i] * f


@njit(cache=True)
def _allman_transform(xy, T):
    T[:, :] = 0.0
    for a in range(3):
        T[2 * a, 3 * a] = 1.0
        T[2 * a + 1, 3 * a + 1] = 1.0
    for s in range(3):
        i = (s + 1) % 3
        j = (s + 2) % 3
        dx = xy[j, 0] - xy[i, 0]
        dy = xy[j, 1] - xy[i, 1]
        r = 6 + 2 * s
        T[r, 3 * i] = 0.5
        T[r, 3 * j] = 0.5
        T[r + 1, 3 * i + 1] = 0.5
        T[r + 1, 3 * j + 1] = 0.5
        T[r, 3 * j + 2] = dy / 8.0
        T[r, 3 * i + 2] = -dy / 8.0
        T[r + 1, 3 * j + 2] = -dx / 8.0
        T[r + 1, 3 * i + 2] = dx / 8.0


@njit(cache=True)
def _lst(xy, xi, eta, B, W):
    l1 = 1.0 - xi - eta
    dxi = np.array([1.0 - 4.0 * l1, 4.0 * xi - 1.0, 0.0, 4.0 * eta, -4.0 * eta, 4.0 * (l1 - xi)])
    deta = np.array([1.0 - 4.0 * l1, 0.0, 4.0 * eta - 1.0, 4.0 * xi, 4.0 * (l1 - eta), -4.0 * xi])
    x21 = xy[1, 0] - xy[0, 0]
    y21 = xy[1, 1] - xy[0, 1]
    x31 = xy[2, 0] - xy[0, 0]
    y31 = xy[2, 1] - xy[0, 1]
    inv = 1.0 / (x21 * y31 - x31 * y21)
    B[:, :] = 0.0
    for k in range(6):
        nx = inv * (y31 * dxi[k] - y21 * deta[k])
        ny = inv * (-x31 * dxi[k] + x21 * deta[k])
        B[0, 2 * k] = nx
        B[1, 2 * k + 1] = ny
        B[2, 2 * k] = ny
        B[2, 2 * k + 1] = nx
        W[2 * k + 1] = 0.5 * nx
        W[2 * k] = -0.5 * ny


@njit(cache=True)
def _allman_stiffness(xy, area, t, Dp, G, drill_ratio):
    T = np.empty((12, 9))
    _allman_transform(xy, T)
    B = np.empty((3, 12))
    W = np.empty(12)
    k = np.zeros((12, 12))
    for g in range(3):
        _lst(xy, GAUSS_XI[g], GAUSS_ETA[g], B, W)
        k += B.T @ (Dp @ B)
    k *= t * area / 3.0
    k9 = T.T @ (k @ T)
    _lst(xy, 1.0 / 3.0, 1.0 / 3.0, B, W)
    P = -(W @ T)
    for a in range(3):
        P[3 * a + 2] += 1.0 / 3.0
    kd = drill_ratio * G * t * area
    for i in range(9):
        for j in range(9):
            k9[i, j] += kd * P[i] * P[j]
    return k9


@njit(cache=True)
def element_stiffness(coords, thickness, E, nu, drill_ratio, membrane):
    ne = coords.shape[0]
    out = np.zeros((ne, 18, 18))
    f = E / (1.0 - nu * nu)
    Dp = np.array([[f, f * nu, 0.0], [f * nu, f, 0.0], [0.0, 0.0, f * 0.5 * (1.0 - nu)]])
    G = E / (2.0 * (1.0 + nu))
    for e in range(ne):
        R = np.empty((3, 3))
        xy = np.empty((3, 2))
        area = _frame(coords[e], R, xy)
        t = thickness[e]
        K = np.zeros((18, 18))

        if membrane == MEMBRANE_ALLMAN:
            k9 = _allman_stiffness(xy, area, t, Dp, G, drill_ratio)
            for i in range(9):
                for j in range(9):
                    K[_ALLMAN[i], _ALLMAN[j]] += k9[i, j]
        else:
            Bm = np.empty((3, 6))
            W = np.empty(6)
            _membrane(xy, area, Bm, W)
            km = (Bm.T @ (Dp @ Bm)) * (t * area)
            for i in range(6):
                for j in range(6):
                    K[_MEMBRANE[i], _MEMBRANE[j]] += km[i, j]
            kd = drill_ratio * G * t * area / 3.0
            for a in range(3):
                P = np.zeros(18)
                for i in range(6):
                    P[_MEMBRANE[i]] = -W[i]
                P[6 * a + 5] = 1.0
                for i in range(18):
                    if P[i] != 0.0:
                        for j in range(18):
                            K[i, j] += kd * P[i] * P[j]

        Cx = np.empty((9, 6))
        Cy = np.empty((9, 6))
        _dkt_coeffs(xy, Cx, Cy)
        Bb = np.empty((3, 9))
        kb = np.zeros((9, 9))
        for g in range(3):
            _curvature(xy, Cx, Cy, GAUSS_XI[g], GAUSS_ETA[g], Bb)
            kb += Bb.T @ (Dp @ Bb)
        kb *= t ** 3 / 12.0 * area / 3.0
        for i in range(9):
            for j in range(9):
                K[_BENDING[i], _BENDING[j]] += kb[i, j]

        # K_global = T^T K T with T = blockdiag(R) -- apply per 3x3 block
        for bi in range(6):
            for bj in range(6):
                blk = np.ascontiguousarray(K[3 * bi:3 * bi + 3, 3 * bj:3 * bj + 3])
                out[e, 3 * bi:3 * bi + 3, 3 * bj:3 * bj + 3] = R.T @ (blk @ R)
    return out


@njit(cache=True)
def element_stress(coords, thickness, E, nu, ue, membrane):
    ne = coords.shape[0]
    vm = np.empty(ne)
    sm_out = np.empty((ne, 3))
    sb_out = np.empty((ne, 3))
    f = E / (1.0 - nu * nu)
    Dp = np.array([[f, f * nu, 0.0], [f * nu, f, 0.0], [0.0, 0.0, f * 0.5 * (1.0 - nu)]])
    for e in range(ne):
        R = np.empty((3, 3))
        xy = np.empty((3, 2))
        area = _frame(coords[e], R, xy)
        ul = np.empty(18)
        for k in range(6):
            for i in range(3):
                s = 0.0
                for j in range(3):
                    s += R[i, j] * ue[e, 3 * k + j]
                ul[3 * k + i] = s
        if membrane == MEMBRANE_ALLMAN:
            T = np.empty((12, 9))
            _allman_transform(xy, T)
            B = np.empty((3, 12))
            W = np.empty(12)
            _lst(xy, 1.0 / 3.0, 1.0 / 3.0, B, W)
            um = np.empty(9)
            for i in range(9):
                um[i] = ul[_ALLMAN[i]]
            sm = Dp @ (B @ (T @ um))
        else:
            Bm = np.empty((3, 6))
            W = np.empty(6)
            _membrane(xy, area, Bm, W)
            um = np.empty(6)
            for i in range(6):
                um[i] = ul[_MEMBRANE[i]]
            sm = Dp @ (Bm @ um)
        Cx = np.empty((9, 6))
        Cy = np.empty((9, 6))
        _dkt_coeffs(xy, Cx, Cy)
        Bb = np.empty((3, 9))
        _curvature(xy, Cx, Cy, 1.0 / 3.0, 1.0 / 3.0, Bb)
        ub = np.empty(9)
        for i in range(9):
            ub[i] = ul[_BENDING[i]]
        sb = (Dp @ (Bb @ ub)) * (0.5 * thickness[e])
        best = 0.0
        for sign in (1.0, -1.0):
            sx = sm[0] + sign * sb[0]
            sy = sm[1] + sign * sb[1]
            txy = sm[2] + sign * sb[2]
            v = sx * sx - sx * sy + sy * sy + 3.0 * txy * txy
            v = np.sqrt(v) if v > 0.0 else 0.0
            if v > best:
                best = v
        vm[e] = best
        sm_out[e] = sm
        sb_out[e] = sb
    return vm, sm_out, sb_out
