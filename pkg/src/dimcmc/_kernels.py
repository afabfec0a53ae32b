"""Numba-compiled inner loops.

Every kernel consumes pre-drawn uniforms instead of owning a generator, so
randomness stays under the caller's RngStream control and runs are bitwise
reproducible. Shapes of the uniform blocks are part of each kernel's
contract and are documented inline.
"""

import numpy as np
from numba import njit

# ---------------------------------------------------------------------------
# Ising lattice
# ---------------------------------------------------------------------------


@njit(cache=True)
def ising_suff(spins):
    """Horizontal plus vertical neighbor product sum, free boundary."""
    m, n = spins.shape
    s = 0
    for i in range(m):
        for j in range(n - 1):
            s += spins[i, j] * spins[i, j + 1]
    for i in range(m - 1):
        for j in range(n):
            s += spins[i, j] * spins[i + 1, j]
    return s


@njit(cache=True, inline="always")
def _ising_nbr_sum(spins, m, n, i, j):
    s = 0
    if i > 0:
        s += spins[i - 1, j]
    if i < m - 1:
        s += spins[i + 1, j]
    if j > 0:
        s += spins[i, j - 1]
    if j < n - 1:
        s += spins[i, j + 1]
    return s


@njit(cache=True)
def ising_sweeps(spins, theta, u):
    """Systematic row-major Gibbs scans, in place.

    u has shape (cycles, m*n): one uniform per site per cycle.
    """
    m, n = spins.shape
    cycles = u.shape[0]
    for c in range(cycles):
        for i in range(m):
            for j in range(n):
                s = _ising_nbr_sum(spins, m, n, i, j)
                p = 1.0 / (1.0 + np.exp(-2.0 * theta * s))
                spins[i, j] = 1 if u[c, i * n + j] < p else -1


@njit(cache=True)
def ising_coupled_sweep(top, bottom, theta, u):
    """One shared-randomness Gibbs scan of both bounding chains.

    Monotone for theta >= 0: preserves top >= bottom sitewise.
    Returns True when the chains are equal after the scan.
    """
    m, n = top.shape
    equal = True
    for i in range(m):
        for j in range(n):
            st = _ising_nbr_sum(top, m, n, i, j)
            sb = _ising_nbr_sum(bottom, m, n, i, j)
            uij = u[i * n + j]
            pt = 1.0 / (1.0 + np.exp(-2.0 * theta * st))
            pb = 1.0 / (1.0 + np.exp(-2.0 * theta * sb))
            top[i, j] = 1 if uij < pt else -1
            bottom[i, j] = 1 if uij < pb else -1
            if top[i, j] != bottom[i, j]:
                equal = False
    return equal


@njit(cache=True)
def ising_coupled_block(top, bottom, theta, block):
    """Run one epoch's shared-randomness scans from its deepest time forward.

    block rows hold per-time uniforms ordered by increasing distance from
    zero, so they are consumed last row first. Returns equality after the
    final scan of this block.
    """
    equal = False
    for r in range(block.shape[0] - 1, -1, -1):
        equal = ising_coupled_sweep(top, bottom, theta, block[r])
    return equal


@njit(cache=True)
def ising_replicate_stats(spins0, theta, u):
    """Independent inner runs from a shared start; returns final suff stats.

    u has shape (reps, cycles, m*n); replicate r consumes u[r] only, so the
    result is identical however the replicates are scheduled.
    """
    reps = u.shape[0]
    out = np.empty(reps, dtype=np.int64)
    for r in range(reps):
        spins = spins0.copy()
        ising_sweeps(spins, theta, u[r])
        out[r] = ising_suff(spins)
    return out


# ---------------------------------------------------------------------------
# Undirected graphs (ERGM)
# ---------------------------------------------------------------------------


@njit(cache=True)
def ergm_suff(adj):
    """(edges, 2-stars, 3-stars, triangles) as float64[4]."""
    n = adj.shape[0]
    deg = np.zeros(n, dtype=np.int64)
    for i in range(n):
        d = 0
        for j in range(n):
            d += adj[i, j]
        deg[i] = d
    edges = 0
    for i in range(n):
        edges += deg[i]
    edges //= 2
    s2 = 0
    s3 = 0
    for i in range(n):
        d = deg[i]
        s2 += d * (d - 1) // 2
        s3 += d * (d - 1) * (d - 2) // 6
    tri = 0
    for i in range(n):
        for j in range(i + 1, n):
            if adj[i, j] == 1:
                for k in range(j + 1, n):
                    if adj[j, k] == 1 and adj[i, k] == 1:
                        tri += 1
    out = np.empty(4, dtype=np.float64)
    out[0] = edges
    out[1] = s2
    out[2] = s3
    out[3] = tri
    return out


@njit(cache=True, inline="always")
def _ergm_change_stat(adj, i, j, ds):
    """Change in suff stats from adding edge (i, j); adj[i, j] must be 0."""
    n = adj.shape[0]
    di = 0
    dj = 0
    common = 0
    for k in range(n):
        di += adj[i, k]
        dj += adj[j, k]
        if adj[i, k] == 1 and adj[j, k] == 1:
            common += 1
    ds[0] = 1.0
    ds[1] = di + dj
    ds[2] = di * (di - 1) // 2 + dj * (dj - 1) // 2
    ds[3] = common


@njit(cache=True)
def ergm_gibbs_cycles(adj, theta, u):
    """Systematic dyad-wise Gibbs scans (lexicographic i < j), in place.

    u has shape (cycles, n*(n-1)//2).
    """
    n = adj.shape[0]
    cycles = u.shape[0]
    ds = np.empty(4, dtype=np.float64)
    for c in range(cycles):
        t = 0
        for i in range(n):
            for j in range(i + 1, n):
                if adj[i, j] == 1:
                    adj[i, j] = 0
                    adj[j, i] = 0
                _ergm_change_stat(adj, i, j, ds)
                lo = theta[0] * ds[0] + theta[1] * ds[1] + theta[2] * ds[2] + theta[3] * ds[3]
                p = 1.0 / (1.0 + np.exp(-lo))
                if u[c, t] < p:
                    adj[i, j] = 1
                    adj[j, i] = 1
                t += 1


@njit(cache=True)
def ergm_tnt_cycles(adj, theta, u):
    """Tie/no-tie MH scans, in place.

    One cycle makes n*(n-1)//2 updates; each consumes u[c, t, 0:3]:
    side choice, element choice, acceptance. A chosen empty side is a no-op.
    """
    n = adj.shape[0]
    ndyads = n * (n - 1) // 2
    cycles = u.shape[0]
    ds = np.empty(4, dtype=np.float64)
    for c in range(cycles):
        for t in range(ndyads):
            edges = 0
            for i in range(n):
                for j in range(i + 1, n):
                    edges += adj[i, j]
            nonties = ndyads - edges
            pick_tie = u[c, t, 0] < 0.5
            count = edges if pick_tie else nonties
            if count == 0:
                continue
            target = int(u[c, t, 1] * count)
            if target >= count:
                target = count - 1
            ii = -1
            jj = -1
            seen = 0
            for i in range(n):
                for j in range(i + 1, n):
                    is_tie = adj[i, j] == 1
                    if is_tie == pick_tie:
                        if seen == target:
                            ii = i
                            jj = j
                        seen += 1
            if pick_tie:
                adj[ii, jj] = 0
                adj[jj, ii] = 0
                _ergm_change_stat(adj, ii, jj, ds)
                dlo = -(theta[0] * ds[0] + theta[1] * ds[1] + theta[2] * ds[2] + theta[3] * ds[3])
                dlo += np.log(edges) - np.log(nonties + 1.0)
                if not (np.log(u[c, t, 2]) < dlo):
                    adj[ii, jj] = 1
                    adj[jj, ii] = 1
            else:
                _ergm_change_stat(adj, ii, jj, ds)
                dlo = theta[0] * ds[0] + theta[1] * ds[1] + theta[2] * ds[2] + theta[3] * ds[3]
                dlo += np.log(nonties) - np.log(edges + 1.0)
                if np.log(u[c, t, 2]) < dlo:
                    adj[ii, jj] = 1
                    adj[jj, ii] = 1


@njit(cache=True)
def ergm_replicate_stats(adj0, theta, u, tnt):
    """Independent graph inner runs; returns final suff stats (reps, 4)."""
    reps = u.shape[0]
    out = np.empty((reps, 4), dtype=np.float64)
    for r in range(reps):
        adj = adj0.copy()
        if tnt:
            cycles, nd3 = u[r].shape
            ergm_tnt_cycles(adj, theta, u[r].reshape(cycles, nd3 // 3, 3))
        else:
            ergm_gibbs_cycles(adj, theta, u[r])
        out[r] = ergm_suff(adj)
    return out


# ---------------------------------------------------------------------------
# Attraction-repulsion point process
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def pp_log_phi(d, t1, t2, t3, R, D1, D2):
    """log of the interaction function; -inf where phi <= 0."""
    if d <= R:
        return -np.inf
    if d <= D1:
        z = np.sqrt(t1) / (t2 - R) * (d - t2)
        v = t1 - z * z
        if v <= 0.0:
            return -np.inf
        return np.log(v)
    z = t3 * (d - D2)
    return np.log(1.0 + 1.0 / (z * z))


@njit(cache=True)
def pp_point_sums(x, y, n, t1, t2, t3, R, D1, D2):
    """Per-point interaction sums s_i = sum_{j != i} log phi(d_ij)."""
    s = np.zeros(n, dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            d = np.sqrt((x[i] - x[j]) ** 2 + (y[i] - y[j]) ** 2)
            lp = pp_log_phi(d, t1, t2, t3, R, D1, D2)
            s[i] += lp
            s[j] += lp
    return s


@njit(cache=True)
def pp_log_h(x, y, n, lam, t1, t2, t3, R, D1, D2, cap):
    """n log(lambda) + sum_i min(s_i, cap)."""
    s = pp_point_sums(x, y, n, t1, t2, t3, R, D1, D2)
    tot = n * np.log(lam)
    for i in range(n):
        tot += min(s[i], cap)
    return tot


@njit(cache=True)
def pp_birth_death_run(x, y, s, n, lam, t1, t2, t3, R, D1, D2, cap, cx, cy, radius, u):
    """Birth-death MH steps, in place on capacity buffers; returns new count.

    u has shape (steps, 4): move type, two location/index draws, acceptance.
    s holds the running per-point interaction sums and must be consistent
    with (x, y, n) on entry.
    """
    area = np.pi * radius * radius
    steps = u.shape[0]
    delta = np.empty(x.shape[0], dtype=np.float64)
    for step in range(steps):
        if u[step, 0] < 0.5:
            if n >= x.shape[0]:
                continue
            r = radius * np.sqrt(u[step, 1])
            ang = 2.0 * np.pi * u[step, 2]
            bx = cx + r * np.cos(ang)
            by = cy + r * np.sin(ang)
            snew = 0.0
            dlogh = 0.0
            for i in range(n):
                d = np.sqrt((x[i] - bx) ** 2 + (y[i] - by) ** 2)
                lp = pp_log_phi(d, t1, t2, t3, R, D1, D2)
                delta[i] = lp
                snew += lp
                dlogh += min(s[i] + lp, cap) - min(s[i], cap)
            dlogh += np.log(lam) + min(snew, cap)
            la = dlogh + np.log(area) - np.log(n + 1.0)
            if np.log(u[step, 3]) < la:
                x[n] = bx
                y[n] = by
                s[n] = snew
                for i in range(n):
                    s[i] += delta[i]
                n += 1
        else:
            if n == 0:
                continue
            k = int(u[step, 1] * n)
            if k >= n:
                k = n - 1
            dlogh = -np.log(lam) - min(s[k], cap)
            for i in range(n):
                if i == k:
                    delta[i] = 0.0
                    continue
                d = np.sqrt((x[i] - x[k]) ** 2 + (y[i] - y[k]) ** 2)
                lp = pp_log_phi(d, t1, t2, t3, R, D1, D2)
                delta[i] = lp
                dlogh += min(s[i] - lp, cap) - min(s[i], cap)
            la = dlogh + np.log(float(n)) - np.log(area)
            if np.log(u[step, 3]) < la:
                for i in range(n):
                    s[i] -= delta[i]
                x[k] = x[n - 1]
                y[k] = y[n - 1]
                s[k] = s[n - 1]
                n -= 1
    return n


@njit(cache=True)
def pp_pair_log_h(xs0, ys0, n0, steps_u, lam, t1, t2, t3, R, D1, D2, cap, cx, cy, radius,
                  thetas_a, thetas_b):
    """Replicate birth-death runs; log h of each final state at two parameter points.

    steps_u has shape (reps, steps, 4). thetas_a/b are (4,) arrays
    (lambda, t1, t2, t3). Returns (reps, 2) of log-densities.
    """
    reps = steps_u.shape[0]
    out = np.empty((reps, 2), dtype=np.float64)
    cap_pts = n0 + steps_u.shape[1] + 8
    for r in range(reps):
        x = np.empty(cap_pts, dtype=np.float64)
        y = np.empty(cap_pts, dtype=np.float64)
        x[:n0] = xs0[:n0]
        y[:n0] = ys0[:n0]
        s = np.empty(cap_pts, dtype=np.float64)
        s[:n0] = pp_point_sums(x, y, n0, t1, t2, t3, R, D1, D2)
        n = pp_birth_death_run(x, y, s, n0, lam, t1, t2, t3, R, D1, D2, cap,
                               cx, cy, radius, steps_u[r])
        out[r, 0] = pp_log_h(x, y, n, thetas_a[0], thetas_a[1], thetas_a[2], thetas_a[3],
                             R, D1, D2, cap)
        out[r, 1] = pp_log_h(x, y, n, thetas_b[0], thetas_b[1], thetas_b[2], thetas_b[3],
                             R, D1, D2, cap)
    return out
