# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the integration-point hot loops.

Signatures and results match ``_batch_numpy``; eigenvectors come from a
cyclic Jacobi solver so the only differences are rounding.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, pow

cnp.import_array()


cdef inline void _jacobi3(double a[3][3], double w[3], double v[3][3]) noexcept nogil:
    cdef int sweep, p, q, r, k, i, j
    cdef double off, scale, theta, t, c, s, apq, arp, arq, vrp, vrq, tmp
    cdef int pairs[3][2]
    pairs[0][0] = 0; pairs[0][1] = 1
    pairs[1][0] = 0; pairs[1][1] = 2
    pairs[2][0] = 1; pairs[2][1] = 2
    for i in range(3):
        for j in range(3):
            v[i][j] = 1.0 if i == j else 0.0
    scale = 0.0
    for i in range(3):
        for j in range(3):
            scale += a[i][j] * a[i][j]
    for sweep in range(60):
        off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]
        if off == 0.0 or off <= 1e-34 * scale:
            break
        for k in range(3):
            p = pairs[k][0]
            q = pairs[k][1]
            apq = a[p][q]
            if apq == 0.0:
                continue
            theta = (a[q][q] - a[p][p]) / (2.0 * apq)
            if fabs(theta) > 1e100:
                t = 0.5 / theta
            else:
                t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
            c = 1.0 / sqrt(t * t + 1.0)
            s = t * c
            a[p][p] -= t * apq
            a[q][q] += t * apq
            a[p][q] = 0.0
            a[q][p] = 0.0
            r = 3 - p - q
            arp = a[r][p]
            arq = a[r][q]
            a[r][p] = c * arp - s * arq
            a[p][r] = a[r][p]
            a[r][q] = s * arp + c * arq
            a[q][r] = a[r][q]
            for r in range(3):
                vrp = v[r][p]
                vrq = v[r][q]
                v[r][p] = c * vrp - s * vrq
                v[r][q] = s * vrp + c * vrq
    for i in range(3):
        w[i] = a[i][i]
    # ascending insertion sort, carrying eigenvector columns
    for i in range(1, 3):
        j = i
        while j > 0 and w[j - 1] > w[j]:
            tmp = w[j - 1]; w[j - 1] = w[j]; w[j] = tmp
            for r in range(3):
                tmp = v[r][j - 1]; v[r][j - 1] = v[r][j]; v[r][j] = tmp
            j -= 1


def no_tension_split(eps_in, double E, double nu):
    cdef double[:, :, ::1] eps = np.ascontiguousarray(eps_in, dtype=np.float64)
    cdef Py_ssize_t n = eps.shape[0]
    psi1_a = np.zeros(n)
    psi2_a = np.zeros(n)
    sig1_a = np.zeros((n, 3, 3))
    sig2_a = np.zeros((n, 3, 3))
    C2_a = np.zeros((n, 3, 3, 3, 3))
    cdef double[::1] psi1 = psi1_a
    cdef double[::1] psi2 = psi2_a
    cdef double[:, :, ::1] sig1 = sig1_a
    cdef double[:, :, ::1] sig2 = sig2_a
    cdef double[:, :, :, :, ::1] C2 = C2_a
    cdef double lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    cdef double mu = E / (2.0 * (1.0 + nu))
    cdef double kk = E / (1.0 - nu * nu)
    cdef double a[3][3]
    cdef double w[3]
    cdef double V[3][3]
    cdef double s[3]
    cdef double D[3][3]
    cdef double th[3][3]
    cdef double tr, ee, e1, e2, e3, de, wmax, val
    cdef Py_ssize_t m
    cdef int i, j, p, q, r, t
    with nogil:
        for m in range(n):
            tr = eps[m, 0, 0] + eps[m, 1, 1] + eps[m, 2, 2]
            ee = 0.0
            for i in range(3):
                for j in range(3):
                    ee += eps[m, i, j] * eps[m, i, j]
                    a[i][j] = eps[m, i, j]
                    sig1[m, i, j] = 2.0 * mu * eps[m, i, j]
                    D[i][j] = 0.0
                    th[i][j] = 0.0
                sig1[m, i, i] += lam * tr
                s[i] = 0.0
            psi1[m] = 0.5 * lam * tr * tr + mu * ee
            _jacobi3(a, w, V)
            e1 = w[0]; e2 = w[1]; e3 = w[2]
            if e1 > 0.0:
                psi2[m] = 0.0
            elif e2 + nu * e1 > 0.0:
                psi2[m] = 0.5 * E * e1 * e1
                s[0] = E * e1
                D[0][0] = E
            elif (1.0 - nu) * e3 + nu * (e1 + e2) > 0.0:
                psi2[m] = 0.5 * kk * (e1 * e1 + e2 * e2 + 2.0 * nu * e1 * e2)
                s[0] = kk * (e1 + nu * e2)
                s[1] = kk * (e2 + nu * e1)
                D[0][0] = kk; D[1][1] = kk
                D[0][1] = kk * nu; D[1][0] = kk * nu
            else:
                psi2[m] = psi1[m]
                for i in range(3):
                    s[i] = lam * (e1 + e2 + e3) + 2.0 * mu * w[i]
                    for j in range(3):
                        D[i][j] = lam + (2.0 * mu if i == j else 0.0)
            wmax = fabs(w[0])
            if fabs(w[2]) > wmax:
                wmax = fabs(w[2])
            if wmax < 1.0:
                wmax = 1.0
            for i in range(3):
                for j in range(3):
                    if i != j:
                        de = w[i] - w[j]
                        if fabs(de) <= 1e-12 * wmax:
                            th[i][j] = 0.5 * (D[i][i] - D[i][j])
                        else:
                            th[i][j] = 0.5 * (s[i] - s[j]) / de
            for p in range(3):
                for q in range(3):
                    val = 0.0
                    for i in range(3):
                        val += s[i] * V[p][i] * V[q][i]
                    sig2[m, p, q] = val
            for p in range(3):
                for q in range(3):
                    for r in range(3):
                        for t in range(3):
                            val = 0.0
                            for i in range(3):
                                for j in range(3):
                                    val += D[i][j] * V[p][i] * V[q][i] * V[r][j] * V[t][j]
                                    if i != j:
                                        val += th[i][j] * V[p][i] * V[q][j] * (V[r][i] * V[t][j] + V[r][j] * V[t][i])
                            C2[m, p, q, r, t] = val
    return psi1_a, psi2_a, sig1_a, sig2_a, C2_a


def j2_return_map(eps_in, eqps_in, double E, double nu, double sigma_y, double n_hard,
                  double tol=1e-12, int max_iter=50):
    cdef double[:, :, ::1] ee = np.ascontiguousarray(eps_in, dtype=np.float64)
    cdef double[::1] p_old = np.ascontiguousarray(eqps_in, dtype=np.float64)
    cdef Py_ssize_t n = ee.shape[0]
    sigma_a = np.zeros((n, 3, 3))
    dg_a = np.zeros(n)
    flow_a = np.zeros((n, 3, 3))
    C_a = np.zeros((n, 3, 3, 3, 3))
    cdef double[:, :, ::1] sigma = sigma_a
    cdef double[::1] dgam = dg_a
    cdef double[:, :, ::1] flow = flow_a
    cdef double[:, :, :, :, ::1] C = C_a
    cdef double K = E / (3.0 * (1.0 - 2.0 * nu))
    cdef double G = E / (2.0 * (1.0 + nu))
    cdef double s[3][3]
    cdef double nb[3][3]
    cdef double tr, q_tr, sf, h, base, f_tr, dg, res, ratio, c1, c2, nn, idev, kd
    cdef Py_ssize_t m
    cdef int i, j, k, l, it, worst = 0
    cdef double worst_res = 0.0
    cdef bint failed = False
    with nogil:
        for m in range(n):
            tr = ee[m, 0, 0] + ee[m, 1, 1] + ee[m, 2, 2]
            q_tr = 0.0
            for i in range(3):
                for j in range(3):
                    s[i][j] = 2.0 * G * ee[m, i, j]
                s[i][i] -= 2.0 * G * tr / 3.0
                for j in range(3):
                    q_tr += s[i][j] * s[i][j]
            q_tr = sqrt(1.5 * q_tr)
            base = 1.0 + E * p_old[m] / sigma_y
            sf = sigma_y * pow(base, n_hard)
            f_tr = q_tr - sf
            dg = 0.0
            if f_tr > tol * sigma_y:
                for it in range(max_iter):
                    base = 1.0 + E * (p_old[m] + dg) / sigma_y
                    sf = sigma_y * pow(base, n_hard)
                    h = n_hard * E * pow(base, n_hard - 1.0)
                    res = q_tr - 3.0 * G * dg - sf
                    if it + 1 > worst:
                        worst = it + 1
                    if fabs(res) <= tol * sigma_y:
                        break
                    dg = dg + res / (3.0 * G + h)
                else:
                    failed = True
                    if fabs(res) > worst_res:
                        worst_res = fabs(res)
                base = 1.0 + E * (p_old[m] + dg) / sigma_y
                h = n_hard * E * pow(base, n_hard - 1.0)
                ratio = dg / q_tr
                nn = 0.0
                for i in range(3):
                    for j in range(3):
                        flow[m, i, j] = 1.5 * s[i][j] / q_tr
                        nn += s[i][j] * s[i][j]
                nn = sqrt(nn)
                for i in range(3):
                    for j in range(3):
                        nb[i][j] = s[i][j] / nn
                c1 = 2.0 * G * (1.0 - 3.0 * G * ratio)
                c2 = 6.0 * G * G * (ratio - 1.0 / (3.0 * G + h))
            else:
                c1 = 2.0 * G
                c2 = 0.0
                for i in range(3):
                    for j in range(3):
                        nb[i][j] = 0.0
            dgam[m] = dg
            for i in range(3):
                for j in range(3):
                    sigma[m, i, j] = s[i][j] - 2.0 * G * dg * flow[m, i, j]
                sigma[m, i, i] += K * tr
            for i in range(3):
                for j in range(3):
                    for k in range(3):
                        for l in range(3):
                            kd = (1.0 if i == j else 0.0) * (1.0 if k == l else 0.0)
                            idev = 0.5 * ((1.0 if i == k else 0.0) * (1.0 if j == l else 0.0)
                                          + (1.0 if i == l else 0.0) * (1.0 if j == k else 0.0)) - kd / 3.0
                            C[m, i, j, k, l] = K * kd + c1 * idev + c2 * nb[i][j] * nb[k][l]
    if failed:
        raise ArithmeticError(f"return map did not converge, residual {worst_res:.3e}")
    return sigma_a, dg_a, flow_a, C_a, worst


def scalar_element_matrices(N_in, dNdx_in, dV_in, m_in, a_in, b_in, D_in, res_in, flux_in):
    cdef double[:, ::1] N = np.ascontiguousarray(N_in, dtype=np.float64)
    cdef double[:, :, :, ::1] G = np.ascontiguousarray(dNdx_in, dtype=np.float64)
    cdef double[:, ::1] dV = np.ascontiguousarray(dV_in, dtype=np.float64)
    cdef double[:, ::1] mm = np.ascontiguousarray(m_in, dtype=np.float64)
    cdef double[:, :, ::1] av = np.ascontiguousarray(a_in, dtype=np.float64)
    cdef double[:, :, ::1] bv = np.ascontiguousarray(b_in, dtype=np.float64)
    cdef double[:, :, :, ::1] D = np.ascontiguousarray(D_in, dtype=np.float64)
    cdef double[:, ::1] res = np.ascontiguousarray(res_in, dtype=np.float64)
    cdef double[:, :, ::1] fl = np.ascontiguousarray(flux_in, dtype=np.float64)
    cdef Py_ssize_t ne = G.shape[0], nq = G.shape[1], nen = G.shape[2], dim = G.shape[3]
    Ke_a = np.zeros((ne, nen, nen))
    Re_a = np.zeros((ne, nen))
    cdef double[:, :, ::1] Ke = Ke_a
    cdef double[:, ::1] Re = Re_a
    cdef Py_ssize_t e, q, A, B, i, j
    cdef double w, agb, bga, dterm, gf, DgB[3]
    with nogil:
        for e in range(ne):
            for q in range(nq):
                w = dV[e, q]
                for A in range(nen):
                    gf = 0.0
                    for i in range(dim):
                        gf += G[e, q, A, i] * fl[e, q, i]
                    Re[e, A] += w * (res[e, q] * N[q, A] - gf)
                for B in range(nen):
                    agb = 0.0
                    for i in range(dim):
                        agb += av[e, q, i] * G[e, q, B, i]
                        DgB[i] = 0.0
                        for j in range(dim):
                            DgB[i] += D[e, q, i, j] * G[e, q, B, j]
                    for A in range(nen):
                        bga = 0.0
                        dterm = 0.0
                        for i in range(dim):
                            bga += G[e, q, A, i] * bv[e, q, i]
                            dterm += G[e, q, A, i] * DgB[i]
                        Ke[e, A, B] += w * (mm[e, q] * N[q, A] * N[q, B] + N[q, A] * agb
                                            - bga * N[q, B] - dterm)
    return Ke_a, Re_a


def vector_element_matrices(dNdx_in, dV_in, Dv_in, sv_in):
    cdef double[:, :, :, ::1] G = np.ascontiguousarray(dNdx_in, dtype=np.float64)
    cdef double[:, ::1] dV = np.ascontiguousarray(dV_in, dtype=np.float64)
    cdef double[:, :, :, ::1] Dv = np.ascontiguousarray(Dv_in, dtype=np.float64)
    cdef double[:, :, ::1] sv = np.ascontiguousarray(sv_in, dtype=np.float64)
    cdef Py_ssize_t ne = G.shape[0], nq = G.shape[1], nen = G.shape[2], dim = G.shape[3]
    cdef Py_ssize_t nv = Dv.shape[2], nd = nen * dim
    Ke_a = np.zeros((ne, nd, nd))
    Re_a = np.zeros((ne, nd))
    Bm_a = np.zeros((nv, nd))
    DB_a = np.zeros((nv, nd))
    cdef double[:, :, ::1] Ke = Ke_a
    cdef double[:, ::1] Re = Re_a
    cdef double[:, ::1] Bm = Bm_a
    cdef double[:, ::1] DB = DB_a
    cdef Py_ssize_t e, q, A, i, j, v, u
    cdef double w, acc
    with nogil:
        for e in range(ne):
            for q in range(nq):
                w = dV[e, q]
                for v in range(nv):
                    for i in range(nd):
                        Bm[v, i] = 0.0
                for A in range(nen):
                    if dim == 2:
                        Bm[0, 2 * A] = G[e, q, A, 0]
                        Bm[1, 2 * A + 1] = G[e, q, A, 1]
                        Bm[2, 2 * A] = G[e, q, A, 1]
                        Bm[2, 2 * A + 1] = G[e, q, A, 0]
                    else:
                        Bm[0, 3 * A] = G[e, q, A, 0]
                        Bm[1, 3 * A + 1] = G[e, q, A, 1]
                        Bm[2, 3 * A + 2] = G[e, q, A, 2]
                        Bm[3, 3 * A + 1] = G[e, q, A, 2]
                        Bm[3, 3 * A + 2] = G[e, q, A, 1]
                        Bm[4, 3 * A] = G[e, q, A, 2]
                        Bm[4, 3 * A + 2] = G[e, q, A, 0]
                        Bm[5, 3 * A] = G[e, q, A, 1]
                        Bm[5, 3 * A + 1] = G[e, q, A, 0]
                for v in range(nv):
                    for j in range(nd):
                        acc = 0.0
                        for u in range(nv):
                            acc += Dv[e, q, v, u] * Bm[u, j]
                        DB[v, j] = acc
                for i in range(nd):
                    acc = 0.0
                    for v in range(nv):
                        acc += Bm[v, i] * sv[e, q, v]
                    Re[e, i] += w * acc
                    for j in range(nd):
                        acc = 0.0
                        for v in range(nv):
                            acc += Bm[v, i] * DB[v, j]
                        Ke[e, i, j] += w * acc
    return Ke_a, Re_a
