# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sphere-search kernel; see _kernels_py.py for the reference version."""
import numpy as np

from libc.math cimport sqrt, pow, fabs, hypot
from libc.stdint cimport uint64_t

cdef double ETA_MIN = 1e-10
cdef double TIE_REL = 1e-12


cdef inline uint64_t splitmix_next(uint64_t* state) nogil:
    cdef uint64_t z
    state[0] = state[0] + <uint64_t>0x9E3779B97F4A7C15
    z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline double cabs_(double complex z) nogil:
    return hypot(z.real, z.imag)


cdef double vnorm(double complex[::1] x, int n, bint inf, double p) nogil:
    cdef double s = 0.0, a
    cdef int j
    if inf:
        for j in range(n):
            a = cabs_(x[j])
            if a > s:
                s = a
        return s
    if p == 1.0:
        for j in range(n):
            s += cabs_(x[j])
        return s
    if p == 2.0:
        for j in range(n):
            s += x[j].real * x[j].real + x[j].imag * x[j].imag
        return sqrt(s)
    for j in range(n):
        s += pow(cabs_(x[j]), p)
    return pow(s, 1.0 / p)


cdef double apply_rows(const double complex[:, ::1] A, double complex[::1] x,
                       double complex[::1] u, double[::1] au, int m, int n) nogil:
    """u = A x, au = |u|; returns nothing useful."""
    cdef int k, j
    cdef double complex acc
    for k in range(m):
        acc = 0
        for j in range(n):
            acc = acc + A[k, j] * x[j]
        u[k] = acc
        au[k] = cabs_(acc)
    return 0.0


cdef double aggregate(double[::1] au, int m, bint inf, double s) nogil:
    cdef double t = 0.0
    cdef int k
    if inf:
        for k in range(m):
            if au[k] > t:
                t = au[k]
        return t
    if s == 1.0:
        for k in range(m):
            t += au[k]
        return t
    if s == 2.0:
        for k in range(m):
            t += au[k] * au[k]
        return sqrt(t)
    for k in range(m):
        t += pow(au[k], s)
    return pow(t, 1.0 / s)


cdef double objective(const double complex[:, ::1] A, double complex[::1] x,
                      double complex[::1] u, double[::1] au, int m, int n,
                      bint norm_inf, double p, bint agg_inf, double s) nogil:
    apply_rows(A, x, u, au, m, n)
    return aggregate(au, m, agg_inf, s) / vnorm(x, n, norm_inf, p)


cdef void gradient(const double complex[:, ::1] A, double complex[::1] x,
                   double complex[::1] u, double[::1] au, double complex[::1] w,
                   double complex[::1] G, int m, int n, bint real_mode,
                   bint agg_inf, double s, uint64_t* state) nogil:
    cdef int k, j, kstar, count, pick
    cdef double mx, g, thresh
    cdef double complex acc
    apply_rows(A, x, u, au, m, n)
    for k in range(m):
        w[k] = 0
    if agg_inf:
        mx = 0.0
        kstar = 0
        for k in range(m):
            if au[k] > mx:
                mx = au[k]
                kstar = k
        thresh = mx - TIE_REL * mx
        count = 0
        for k in range(m):
            if au[k] >= thresh:
                count += 1
        if count > 1 and mx > 0:
            pick = <int>(splitmix_next(state) % <uint64_t>count)
            count = 0
            for k in range(m):
                if au[k] >= thresh:
                    if count == pick:
                        kstar = k
                        break
                    count += 1
        if au[kstar] > 0:
            w[kstar] = u[kstar] / au[kstar]
    else:
        g = aggregate(au, m, False, s)
        if g <= 0:
            g = 1.0
        for k in range(m):
            if au[k] > 0:
                if s == 1.0:
                    w[k] = u[k] / au[k]
                else:
                    w[k] = pow(au[k] / g, s - 1.0) * (u[k] / au[k])
    for j in range(n):
        acc = 0
        for k in range(m):
            acc = acc + w[k] * A[k, j].conjugate()
        if real_mode:
            G[j] = acc.real
        else:
            G[j] = acc


cdef bint lmo(double complex[::1] G, double complex[::1] y, int n, bint norm_inf, double p) nogil:
    """Unit-ball maximizer of Re<G, y>; returns False when G = 0."""
    cdef int j, jstar
    cdef double a, mx = 0.0, q
    jstar = 0
    for j in range(n):
        a = cabs_(G[j])
        if a > mx:
            mx = a
            jstar = j
    if mx == 0:
        return False
    if norm_inf:
        for j in range(n):
            a = cabs_(G[j])
            if a > 0:
                y[j] = G[j] / a
            else:
                y[j] = 0
    elif p == 1.0:
        for j in range(n):
            y[j] = 0
        y[jstar] = G[jstar] / mx
    else:
        q = p / (p - 1.0)
        for j in range(n):
            a = cabs_(G[j])
            if a > 0:
                y[j] = (G[j] / a) * pow(a / mx, q - 1.0)
            else:
                y[j] = 0
    return True


cdef double search_one(const double complex[:, ::1] A, double complex[::1] x,
                       double complex[::1] y, double complex[::1] u, double[::1] au,
                       double complex[::1] w, double complex[::1] G, int m, int n,
                       bint real_mode, bint norm_inf, double p, bint agg_inf, double s,
                       uint64_t* state, int iters, int polish_iters) nogil:
    cdef int it, j
    cdef double nx, val, v, eta = 1.0, gn, c
    nx = vnorm(x, n, norm_inf, p)
    if nx == 0:
        for j in range(n):
            x[j] = 0
        x[0] = 1.0
        nx = 1.0
    for j in range(n):
        x[j] = x[j] / nx
    val = objective(A, x, u, au, m, n, norm_inf, p, agg_inf, s)

    for it in range(iters):
        if eta < ETA_MIN:
            break
        gradient(A, x, u, au, w, G, m, n, real_mode, agg_inf, s, state)
        gn = 0.0
        for j in range(n):
            gn += G[j].real * G[j].real + G[j].imag * G[j].imag
        gn = sqrt(gn)
        if gn == 0:
            break
        c = eta / gn
        for j in range(n):
            y[j] = x[j] + c * G[j]
        nx = vnorm(y, n, norm_inf, p)
        if nx > 0:
            for j in range(n):
                y[j] = y[j] / nx
            v = objective(A, y, u, au, m, n, norm_inf, p, agg_inf, s)
        else:
            v = -1.0
        if v > val:
            for j in range(n):
                x[j] = y[j]
            val = v
        else:
            eta *= 0.5

    for it in range(polish_iters):
        gradient(A, x, u, au, w, G, m, n, real_mode, agg_inf, s, state)
        if not lmo(G, y, n, norm_inf, p):
            break
        nx = vnorm(y, n, norm_inf, p)
        for j in range(n):
            y[j] = y[j] / nx
        v = objective(A, y, u, au, m, n, norm_inf, p, agg_inf, s)
        if v > val:
            for j in range(n):
                x[j] = y[j]
            val = v
        else:
            break
    return objective(A, x, u, au, m, n, norm_inf, p, agg_inf, s)


def sphere_search(A, bint real_mode, bint norm_inf, double norm_p, bint agg_inf, double agg_p,
                  starts, tie_seeds, int iters, int polish_iters):
    cdef const double complex[:, ::1] Av = np.ascontiguousarray(A, dtype=np.complex128)
    X = np.array(starts, dtype=np.complex128, copy=True, order="C")
    cdef double complex[:, ::1] Xv = X
    cdef int K = X.shape[0], n = X.shape[1], m = Av.shape[0], k
    seeds = np.asarray([int(t) & 0xFFFFFFFFFFFFFFFF for t in tie_seeds], dtype=np.uint64)
    cdef uint64_t[::1] sv = seeds
    values = np.empty(K)
    cdef double[::1] vv = values
    cdef double complex[::1] y = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] G = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] u = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] w = np.empty(m, dtype=np.complex128)
    cdef double[::1] au = np.empty(m)
    cdef uint64_t state
    with nogil:
        for k in range(K):
            state = sv[k]
            vv[k] = search_one(Av, Xv[k], y, u, au, w, G, m, n, real_mode, norm_inf, norm_p,
                               agg_inf, agg_p, &state, iters, polish_iters)
    return values, X
