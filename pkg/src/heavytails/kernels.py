"""Hot inner loops: numba-compiled kernels plus pure-numpy fallbacks.

Every kernel consumes pre-generated random deviates (or none at all), so
a given backend is bit-reproducible from the seed.  The numba and numpy
paths consume the underlying streams in different orders and are
therefore statistically equivalent but not bit-identical to each other;
select with the HEAVYTAILS_BACKEND environment variable.
"""

import numpy as np

from . import backend

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def use_numba():
    return HAVE_NUMBA and backend.USE_NUMBA


# ---------------------------------------------------------------------------
# multiplicative-noise recursion x(t+1) = b(t) x(t) + f(t)

_DIVERGE = 1e300


@njit(cache=True)
def _langevin_numba(b, f, x0):
    n = b.shape[0]
    x = np.empty(n + 1)
    x[0] = x0
    for t in range(n):
        v = b[t] * x[t] + f[t]
        if v > _DIVERGE or v < -_DIVERGE or v != v:
            x[t + 1] = v
            return x, t + 1
        x[t + 1] = v
    return x, -1


def _langevin_numpy(b, f, x0):
    n = b.shape[0]
    x = np.empty(n + 1)
    x[0] = x0
    cur = x0
    for t in range(n):
        cur = b[t] * cur + f[t]
        x[t + 1] = cur
        if not (-_DIVERGE <= cur <= _DIVERGE):
            return x, t + 1
    return x, -1


def langevin_path(b, f, x0=0.0):
    """Iterate the recursion over pre-drawn (b, f) arrays.

    Returns (trajectory including x0, diverged-step index or -1).
    """
    b = np.ascontiguousarray(b, dtype=np.float64)
    f = np.ascontiguousarray(f, dtype=np.float64)
    if use_numba():
        return _langevin_numba(b, f, float(x0))
    return _langevin_numpy(b, f, float(x0))


# ---------------------------------------------------------------------------
# threshold-episode state machine
#
# An episode is driven entirely by w = F(y) (the survival probability of a
# fresh state draw given the current threshold y ~ G): the state survives a
# step iff a fresh uniform u < w.  Consumption per event: episode start uses
# one w and one u; each later step uses one coin c and one u, plus one w when
# the coin says "redraw both".  Kernels consume pre-filled buffers and return
# a resumable cursor state so the caller can refill from the seeded stream.

STATE_LEN = 8  # iw, iu, ic, t, in_episode, n_done, n_censored, w (packed)


@njit(cache=True)
def _episodes_numba(ws, us, cs, eta, t_cap, n_target, hist, state):
    iw = int(state[0]); iu = int(state[1]); ic = int(state[2])
    t = int(state[3]); in_ep = int(state[4])
    n_done = int(state[5]); n_cens = int(state[6]); w = state[7]
    nw = ws.shape[0]; nu = us.shape[0]; nc = cs.shape[0]
    while n_done < n_target:
        if in_ep == 0:
            if iw >= nw or iu >= nu:
                break
            w = ws[iw]; iw += 1
            u = us[iu]; iu += 1
            if u >= w:
                hist[0] += 1
                n_done += 1
                continue
            t = 1
            in_ep = 1
        else:
            if ic >= nc or iu >= nu:
                break
            c = cs[ic]; ic += 1
            if c >= eta:
                if iw >= nw:
                    ic -= 1  # push the coin back; retry after refill
                    break
                w = ws[iw]; iw += 1
            u = us[iu]; iu += 1
            if u >= w:
                hist[t] += 1
                n_done += 1
                in_ep = 0
            else:
                t += 1
                if t > t_cap:
                    n_cens += 1
                    n_done += 1
                    in_ep = 0
    state[0] = iw; state[1] = iu; state[2] = ic
    state[3] = t; state[4] = in_ep
    state[5] = n_done; state[6] = n_cens; state[7] = w
    return n_done


def _episodes_numpy(sample_w, rng, n_episodes, eta, t_cap, hist):
    """Vectorized alive-set sweep over a block of episodes."""
    w = sample_w(rng, n_episodes)
    u = rng.random(n_episodes)
    alive = u < w
    hist[0] += int(n_episodes - np.count_nonzero(alive))
    w = w[alive]
    t = 1
    n_cens = 0
    while w.size:
        if t > t_cap:
            n_cens += int(w.size)
            break
        if eta < 1.0:
            redraw = rng.random(w.size) >= eta
            n_new = int(np.count_nonzero(redraw))
            if n_new:
                w[redraw] = sample_w(rng, n_new)
        u = rng.random(w.size)
        dead = u >= w
        hist[t] += int(np.count_nonzero(dead))
        w = w[~dead]
        t += 1
    return n_cens


# ---------------------------------------------------------------------------
# sandpile relaxation (synchronous parallel updates, open boundaries)


@njit(cache=True)
def _avalanche_int_numba(E, L, drive_site, visited, mark, ticks, max_topplings):
    """Drive one unit (= E_c/4) at drive_site and relax; integer units.

    E is the flattened L*L exceedance lattice in units of E_c/4; a site
    is active when E >= 0 and a toppling sheds exactly 4 units, one to
    each neighbor (off-lattice shares are dissipated).  Updates are
    synchronous: every site active at the start of a parallel step
    topples in that step.  `visited` and `mark` are caller-owned scratch
    stamps (avalanche id / step id held in `ticks`), so the lattice is
    never rescanned.
    """
    E[drive_site] += 1
    if E[drive_site] < 0:
        return 0, 0, 0, np.int64(0)
    av = ticks[0] + 1
    ticks[0] = av
    n = L * L
    cur = np.empty(n, np.int64)
    nxt = np.empty(n, np.int64)
    cur[0] = drive_site
    n_cur = 1
    s = 0
    t = 0
    a = 0
    diss = np.int64(0)
    while n_cur > 0:
        n_act = 0
        for ii in range(n_cur):
            site = cur[ii]
            if E[site] >= 0:
                cur[n_act] = site
                n_act += 1
        if n_act == 0:
            break
        t += 1
        s += n_act
        if s > max_topplings:
            return -1, -1, -1, diss
        tick = ticks[1] + 1
        ticks[1] = tick
        n_nxt = 0
        for ii in range(n_act):
            site = cur[ii]
            if visited[site] != av:
                visited[site] = av
                a += 1
            E[site] -= 4
            if mark[site] != tick:
                mark[site] = tick
                nxt[n_nxt] = site
                n_nxt += 1
            i = site // L
            j = site - i * L
            if i > 0:
                nb = site - L
                E[nb] += 1
                if mark[nb] != tick:
                    mark[nb] = tick
                    nxt[n_nxt] = nb
                    n_nxt += 1
            else:
                diss += 1
            if i < L - 1:
                nb = site + L
                E[nb] += 1
                if mark[nb] != tick:
                    mark[nb] = tick
                    nxt[n_nxt] = nb
                    n_nxt += 1
            else:
                diss += 1
            if j > 0:
                nb = site - 1
                E[nb] += 1
                if mark[nb] != tick:
                    mark[nb] = tick
                    nxt[n_nxt] = nb
                    n_nxt += 1
            else:
                diss += 1
            if j < L - 1:
                nb = site + 1
                E[nb] += 1
                if mark[nb] != tick:
                    mark[nb] = tick
                    nxt[n_nxt] = nb
                    n_nxt += 1
            else:
                diss += 1
        cur, nxt = nxt, cur
        n_cur = n_nxt
    return s, a, t, diss


@njit(cache=True)
def _avalanche_float_numba(E, L, drive_site, drive, chi, ec,
                           visited, mark, ticks, max_topplings):
    """Float-mode avalanche: a toppling sheds chi*E + ec (start-of-step E)."""
    E[drive_site] += drive
    if E[drive_site] < 0.0:
        return 0, 0, 0, 0.0
    av = ticks[0] + 1
    ticks[0] = av
    n = L * L
    cur = np.empty(n, np.int64)
    nxt = np.empty(n, np.int64)
    shares = np.empty(n, np.float64)
    cur[0] = drive_site
    n_cur = 1
    s = 0
    t = 0
    a = 0
    diss = 0.0
    while n_cur > 0:
        n_act = 0
        for ii in range(n_cur):
            site = cur[ii]
            if E[site] >= 0.0:
                cur[n_act] = site
                n_act += 1
        if n_act == 0:
            break
        t += 1
        s += n_act
        if s > max_topplings:
            return -1, -1, -1, diss
        # sheds use start-of-step values: compute before touching E
        for ii in range(n_act):
            shares[ii] = (chi * E[cur[ii]] + ec) * 0.25
        tick = ticks[1] + 1
        ticks[1] = tick
        n_nxt = 0
        for ii in range(n_act):
            site = cur[ii]
            share = shares[ii]
            if visited[site] != av:
                visited[site] = av
                a += 1
            E[site] -= 4.0 * share
            if mark[site] != tick:
                mark[site] = tick
                nxt[n_nxt] = site
                n_nxt += 1
            i = site // L
            j = site - i * L
            if i > 0:
                nb = site - L
                E[nb] += share
                if mark[nb] != tick:
                    mark[nb] = tick
                    nxt[n_nxt] = nb
                    n_nxt += 1
            else:
                diss += share
            if i < L - 1:
                nb = site + L
                E[nb] += share
                if mark[nb] != tick:
                    mark[nb] = tick
                    nxt[n_nxt] = nb
                    n_nxt += 1
            else:
                diss += share
            if j > 0:
                nb = site - 1
                E[nb] += share
                if mark[nb] != tick:
                    mark[nb] = tick
                    nxt[n_nxt] = nb
                    n_nxt += 1
            else:
                diss += share
            if j < L - 1:
                nb = site + 1
                E[nb] += share
                if mark[nb] != tick:
                    mark[nb] = tick
                    nxt[n_nxt] = nb
                    n_nxt += 1
            else:
                diss += share
        cur, nxt = nxt, cur
        n_cur = n_nxt
    return s, a, t, diss


def _relax_btw_int_numpy(E, L, max_topplings):
    s = 0
    t = 0
    dissipated = np.int64(0)
    visited = np.zeros((L, L), dtype=bool)
    while True:
        active = E >= 0
        n_active = int(np.count_nonzero(active))
        if n_active == 0:
            break
        t += 1
        s += n_active
        if s > max_topplings:
            return -1, -1, -1, dissipated
        visited |= active
        act = active.astype(np.int64)
        E -= 4 * act
        E[:-1, :] += act[1:, :]
        E[1:, :] += act[:-1, :]
        E[:, :-1] += act[:, 1:]
        E[:, 1:] += act[:, :-1]
        dissipated += act[0, :].sum() + act[-1, :].sum() + act[:, 0].sum() + act[:, -1].sum()
    return s, int(np.count_nonzero(visited)), t, dissipated


def _relax_float_numpy(E, L, chi, ec, max_topplings):
    s = 0
    t = 0
    dissipated = 0.0
    visited = np.zeros((L, L), dtype=bool)
    while True:
        active = E >= 0.0
        n_active = int(np.count_nonzero(active))
        if n_active == 0:
            break
        t += 1
        s += n_active
        if s > max_topplings:
            return -1, -1, -1, dissipated
        visited |= active
        share = np.where(active, (chi * E + ec) * 0.25, 0.0)
        E -= 4.0 * share
        E[:-1, :] += share[1:, :]
        E[1:, :] += share[:-1, :]
        E[:, :-1] += share[:, 1:]
        E[:, 1:] += share[:, :-1]
        dissipated += float(share[0, :].sum() + share[-1, :].sum()
                            + share[:, 0].sum() + share[:, -1].sum())
    return s, int(np.count_nonzero(visited)), t, dissipated


class SandpileScratch:
    """Caller-owned stamp arrays so avalanches never rescan the lattice."""

    def __init__(self, L):
        self.visited = np.zeros(L * L, dtype=np.int64)
        self.mark = np.zeros(L * L, dtype=np.int64)
        self.ticks = np.zeros(2, dtype=np.int64)


def avalanche_int(E, L, drive_site, scratch, max_topplings=10 ** 9):
    """Drive + relax in integer units.  E is the flattened lattice."""
    if use_numba():
        return _avalanche_int_numba(E, L, drive_site, scratch.visited,
                                    scratch.mark, scratch.ticks, max_topplings)
    E2 = E.reshape(L, L)
    E2.flat[drive_site] += 1
    return _relax_btw_int_numpy(E2, L, max_topplings)


def avalanche_float(E, L, drive_site, drive, chi, ec, scratch,
                    max_topplings=10 ** 9):
    if use_numba():
        return _avalanche_float_numba(E, L, drive_site, float(drive),
                                      float(chi), float(ec), scratch.visited,
                                      scratch.mark, scratch.ticks,
                                      max_topplings)
    E2 = E.reshape(L, L)
    E2.flat[drive_site] += drive
    return _relax_float_numpy(E2, L, float(chi), float(ec), max_topplings)
