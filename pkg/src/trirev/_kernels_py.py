"""Pure numpy implementation of the sphere-search kernel.

Same algorithm, stopping rules and tie-breaking stream as ``_kernels.pyx``;
this version advances all starts together as a batch.
"""
import numpy as np

MASK64 = (1 << 64) - 1
ETA_MIN = 1e-10
TIE_REL = 1e-12


def splitmix64(state):
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def _vnorm(X, norm_inf, p):
    a = np.abs(X)
    if norm_inf:
        return a.max(axis=1)
    if p == 1.0:
        return a.sum(axis=1)
    if p == 2.0:
        return np.sqrt((a * a).sum(axis=1))
    return (a ** p).sum(axis=1) ** (1.0 / p)


def _aggregate(aU, agg_inf, s):
    if agg_inf:
        return aU.max(axis=1)
    if s == 1.0:
        return aU.sum(axis=1)
    if s == 2.0:
        return np.sqrt((aU * aU).sum(axis=1))
    return (aU ** s).sum(axis=1) ** (1.0 / s)


def _phase(Z):
    a = np.abs(Z)
    out = np.zeros_like(Z)
    nz = a > 0
    out[nz] = Z[nz] / a[nz]
    return out, a


def _objective(A, X, norm_inf, p, agg_inf, s):
    aU = np.abs(X @ A.T)
    return _aggregate(aU, agg_inf, s) / _vnorm(X, norm_inf, p)


def _grad(A, X, real_mode, agg_inf, s, states, rows):
    U = X @ A.T
    ph, aU = _phase(U)
    W = np.zeros_like(U)
    if agg_inf:
        mx = aU.max(axis=1)
        kstar = aU.argmax(axis=1)
        thresh = mx - TIE_REL * mx
        hits = aU >= thresh[:, None]
        ties = (hits.sum(axis=1) > 1) & (mx > 0)
        for r in np.flatnonzero(ties):
            cand = np.flatnonzero(hits[r])
            states[rows[r]], out = splitmix64(states[rows[r]])
            kstar[r] = cand[out % len(cand)]
        idx = np.arange(U.shape[0])
        W[idx, kstar] = ph[idx, kstar]
    else:
        g = _aggregate(aU, False, s)
        if s == 1.0:
            W = ph
        else:
            safe = np.where(g > 0, g, 1.0)[:, None]
            W = (aU / safe) ** (s - 1.0) * ph
    G = W @ np.conj(A)
    if real_mode:
        G = G.real.astype(np.complex128)
    return G


def _lmo(G, norm_inf, p):
    ph, aG = _phase(G)
    if norm_inf:
        return ph
    if p == 1.0:
        j = aG.argmax(axis=1)
        Y = np.zeros_like(G)
        idx = np.arange(G.shape[0])
        Y[idx, j] = ph[idx, j]
        return Y
    q = p / (p - 1.0)
    mx = aG.max(axis=1, keepdims=True)
    mx = np.where(mx > 0, mx, 1.0)
    return ph * (aG / mx) ** (q - 1.0)


def sphere_search(A, real_mode, norm_inf, norm_p, agg_inf, agg_p, starts, tie_seeds,
                  iters, polish_iters):
    """Maximize (aggregate_k |(A x)_k|) / ‖x‖ from each start.

    Returns per-start values and final points.
    """
    A = np.ascontiguousarray(A, dtype=np.complex128)
    X = np.array(starts, dtype=np.complex128, copy=True)
    K, n = X.shape
    states = [int(s) & MASK64 for s in tie_seeds]

    nx = _vnorm(X, norm_inf, norm_p)
    dead = nx == 0
    X[dead] = 0
    X[dead, 0] = 1.0
    nx[dead] = 1.0
    X /= nx[:, None]
    val = _objective(A, X, norm_inf, norm_p, agg_inf, agg_p)

    eta = np.ones(K)
    active = np.ones(K, dtype=bool)
    for _ in range(iters):
        rows = np.flatnonzero(active)
        if rows.size == 0:
            break
        G = _grad(A, X[rows], real_mode, agg_inf, agg_p, states, rows)
        gn = np.sqrt((np.abs(G) ** 2).sum(axis=1))
        stop = gn == 0
        active[rows[stop]] = False
        keep = ~stop
        rows, G, gn = rows[keep], G[keep], gn[keep]
        if rows.size == 0:
            continue
        Y = X[rows] + (eta[rows] / gn)[:, None] * G
        ny = _vnorm(Y, norm_inf, norm_p)
        okn = ny > 0
        Y[okn] /= ny[okn, None]
        v = np.full(rows.size, -np.inf)
        if okn.any():
            v[okn] = _objective(A, Y[okn], norm_inf, norm_p, agg_inf, agg_p)
        better = v > val[rows]
        X[rows[better]] = Y[better]
        val[rows[better]] = v[better]
        eta[rows[~better]] *= 0.5
        active[rows[eta[rows] < ETA_MIN]] = False

    active = np.ones(K, dtype=bool)
    for _ in range(polish_iters):
        rows = np.flatnonzero(active)
        if rows.size == 0:
            break
        G = _grad(A, X[rows], real_mode, agg_inf, agg_p, states, rows)
        zero = np.abs(G).max(axis=1) == 0
        active[rows[zero]] = False
        rows, G = rows[~zero], G[~zero]
        if rows.size == 0:
            break
        Y = _lmo(G, norm_inf, norm_p)
        Y /= _vnorm(Y, norm_inf, norm_p)[:, None]
        v = _objective(A, Y, norm_inf, norm_p, agg_inf, agg_p)
        better = v > val[rows]
        X[rows[better]] = Y[better]
        val[rows[better]] = v[better]
        active[rows[~better]] = False

    val = _objective(A, X, norm_inf, norm_p, agg_inf, agg_p)
    return val, X
