"""Two-sided matrix bounds for the pressure of Möbius systems.

For ``phi_e(x) = 1/(x + d_e)`` the weight of a word factorises as
``prod_i exp(beta c_{w_i}) (d_{w_i} + y_i)^(-2t)`` with ``y_i`` the image of
the remaining tail, so ``y_i`` lies in the cylinder of the next few symbols.
Fix a prefix code of cylinders of length at most ``delta`` (the *states*).
Prepending a symbol ``e`` to a state ``s`` lands in a unique state
``T(e, s)``; bounding each weight by its sup (resp. inf) over the cylinder of
``s`` gives nonnegative matrices ``M_sup`` and ``M_inf`` with
``c rho(M_inf)^n <= Z_n <= C rho(M_sup)^n``. Both spectral radii are enclosed
by Collatz-Wielandt ratios of a positive vector.

Symbols above ``m0`` are lumped into consecutive groups whose images have
length at most ``delta``; a group is treated as one symbol whose weight is the
sum of its members' weights. Deeper nodes of the code use coarser groups, so
the number of lumped states stays small.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from .enclosure import Enclosure, down, up
from .laws import BudgetError, DivergenceError, MoebiusLaw
from .potential import WeightedPotential
from .series import log_series
from .system import SystemSpec

_EPS = float(np.finfo(float).eps)
_SENTINEL = np.iinfo(np.int64).min
_GRID_GROUP = 1 << 16


def lumped_groups(sys: SystemSpec, m0: int, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Consecutive symbol groups above ``m0`` with image hulls of length ``<= delta``.

    Returns first and last symbols; a last symbol of 0 marks an unbounded group.
    Groups reduced to one symbol may be longer than ``delta``.
    """
    size = sys.alphabet
    starts, ends = [], []
    if size is not None and size <= m0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    a = m0 + 1
    while True:
        final = 1.0 / float(sys.shift(a)) <= delta
        if not final:
            b = max(a, int(math.floor(1.0 / (1.0 / a - delta))) - 1)
            final = size is not None and b >= size
        if final:
            starts.append(a)
            ends.append(0 if size is None else size)
            break
        starts.append(a)
        ends.append(b)
        a = b + 1
    return np.array(starts, dtype=np.int64), np.array(ends, dtype=np.int64)


@dataclass
class CylinderGraph:
    """States, their intervals, and the transitions ``s -> T(e, s)``.

    ``sym`` holds ``1..m0`` for explicit symbols and ``m0 + 1 + f`` for the
    finest lumped group ``f``. Transitions are stored sorted by ``(dst, src)``
    with ``indptr`` so that matrices can be assembled in CSR form directly.
    """

    m0: int
    starts: np.ndarray
    ends: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    src: np.ndarray
    sym: np.ndarray
    dst: np.ndarray
    indptr: np.ndarray

    @property
    def n_states(self) -> int:
        return len(self.lo)


def _mobius(a, b, c, d, x):
    return (a * x + b) / (c * x + d)


def _level(d: np.ndarray) -> np.ndarray:
    # largest j with 2^j <= d^2, i.e. sup |phi_u'| * 2^j <= 1
    return np.maximum(np.frexp(d * d)[1] - 1, 0).astype(np.int64)


@lru_cache(maxsize=16)
def cylinder_graph(sys: SystemSpec, m0: int, delta: float, max_states: int) -> CylinderGraph:
    starts, ends = lumped_groups(sys, m0, delta)
    k0 = len(starts)
    width = m0 + k0
    d_exp = sys.shift(np.arange(1, m0 + 1, dtype=float))
    rel = 4 * _EPS if sys.family == "gauss" else 64 * _EPS
    if k0:
        g_lo = np.where(ends == 0, 0.0, 1.0 / (sys.shift(np.maximum(ends, 1).astype(float)) + 1.0))
        g_hi = 1.0 / sys.shift(starts.astype(float))
        g_lo = g_lo * (1 - rel)
        g_hi = g_hi * (1 + rel)

    child_rows, levels = [], []
    st_lo, st_hi, st_words = [], [], []
    n_st = 0

    def add_states(lo, hi, words):
        nonlocal n_st
        st_lo.append(lo)
        st_hi.append(hi)
        st_words.append(words)
        codes = -(n_st + np.arange(len(lo))) - 1
        n_st += len(lo)
        return codes

    fa, fb, fc, fd = (np.array([v]) for v in (1.0, 0.0, 0.0, 1.0))
    fwords = np.zeros((1, 0), dtype=np.int64)
    flevel = np.zeros(1, dtype=np.int64)
    next_id = 1
    while len(fa):
        nf = len(fa)
        row = np.full((nf, width), _SENTINEL, dtype=np.int64)
        # explicit children: M_u @ [[0, 1], [1, d_e]]
        a = np.repeat(fb, m0)
        b = (fa[:, None] + fb[:, None] * d_exp[None, :]).ravel()
        c = np.repeat(fd, m0)
        d = (fc[:, None] + fd[:, None] * d_exp[None, :]).ravel()
        words = np.concatenate([np.repeat(fwords, m0, axis=0),
                                np.tile(np.arange(1, m0 + 1), nf)[:, None]], axis=1)
        terminal = 1.0 / (d * (c + d)) <= delta
        p0, p1 = b / d, (a + b) / (c + d)
        codes = np.empty(len(a), dtype=np.int64)
        codes[terminal] = add_states(np.minimum(p0, p1)[terminal] * (1 - rel),
                                     np.maximum(p0, p1)[terminal] * (1 + rel), words[terminal])
        inner = ~terminal
        n_inner = int(inner.sum())
        codes[inner] = next_id + np.arange(n_inner)
        next_id += n_inner
        row[:, :m0] = codes.reshape(nf, m0)
        if k0:
            counts = -(-k0 // (1 << flevel))
            node = np.repeat(np.arange(nf), counts)
            g = np.arange(len(node)) - np.repeat(np.cumsum(counts) - counts, counts)
            j = flevel[node]
            f0 = g << j
            f1 = np.minimum((g + 1) << j, k0) - 1
            ylo, yhi = g_lo[f1], g_hi[f0]
            q0 = _mobius(fa[node], fb[node], fc[node], fd[node], ylo)
            q1 = _mobius(fa[node], fb[node], fc[node], fd[node], yhi)
            lwords = np.concatenate([fwords[node], (m0 + 1 + f0)[:, None]], axis=1)
            row[node, m0 + g] = add_states(np.minimum(q0, q1) * (1 - rel),
                                           np.maximum(q0, q1) * (1 + rel), lwords)
        child_rows.append(row)
        levels.append(flevel)
        fa, fb, fc, fd = a[inner], b[inner], c[inner], d[inner]
        fwords = words[inner]
        flevel = _level(fd)
        if n_st + len(fa) * width > max_states:
            raise BudgetError(f"cylinder graph exceeds {max_states} states at delta={delta:g}")

    child = np.concatenate(child_rows, axis=0)
    level = np.concatenate(levels)
    lo = np.maximum(np.concatenate(st_lo), 0.0)
    hi = np.minimum(np.concatenate(st_hi), 1.0)
    n = len(lo)
    maxlen = max(w.shape[1] for w in st_words)
    seq = np.zeros((n, maxlen), dtype=np.int64)
    pos = 0
    for w in st_words:
        seq[pos:pos + len(w), : w.shape[1]] = w
        pos += len(w)

    # T(e, s): walk the trie along e, s_1, s_2, ...; lumped symbols are
    # coarsened to the level of the node they are read at
    src = np.repeat(np.arange(n), width)
    sym = np.tile(np.arange(1, width + 1), n)
    node = child[0, sym - 1]
    j = 0
    while True:
        idx = np.nonzero(node >= 0)[0]
        if not len(idx):
            break
        v = seq[src[idx], j] if j < maxlen else np.zeros(len(idx), dtype=np.int64)
        if np.any(v == 0):
            raise RuntimeError("cylinder code is not closed under prepending symbols")
        at = node[idx]
        col = np.where(v <= m0, v - 1, m0 + ((v - m0 - 1) >> level[at]))
        node[idx] = child[at, col]
        j += 1
    if np.any(node == _SENTINEL):
        raise RuntimeError("cylinder code walk left the trie")
    dst = -node - 1
    order = np.lexsort((src, dst))
    src, sym, dst = src[order], sym[order], dst[order]
    indptr = np.concatenate([[0], np.cumsum(np.bincount(dst, minlength=n))])
    return CylinderGraph(m0, starts, ends, lo, hi, src, sym, dst, indptr)


def group_log_sums(wp: WeightedPotential, graph: CylinderGraph, ys: np.ndarray):
    """Bounds on ``log sum_{e in G} exp(beta c_e) (d_e + y)^(-2t)`` for every group.

    Returns ``(lower, upper)`` of shape ``(len(ys), n_groups)``.
    """
    sys, t, beta = wp.system, float(wp.t), float(wp.beta)
    k0 = len(graph.starts)
    lower = np.empty((len(ys), k0))
    upper = np.empty((len(ys), k0))
    lengths = graph.ends - graph.starts + 1
    gridded = (graph.ends != 0) & (lengths <= _GRID_GROUP)
    gi = np.nonzero(gridded)[0]
    if len(gi):
        lens = lengths[gi]
        offs = np.concatenate([[0], np.cumsum(lens)[:-1]])
        e = (np.repeat(graph.starts[gi] - offs, lens) + np.arange(lens.sum())).astype(float)
        c = beta * wp.psi.value(e) if beta != 0.0 else np.zeros_like(e)
        logd = np.log(sys.shift(e)[None, :] + ys[:, None])
        lg = c[None, :] - 2.0 * t * logd
        peak = np.maximum.reduceat(lg, offs, axis=1)
        s = np.log(np.add.reduceat(np.exp(lg - np.repeat(peak, lens, axis=1)), offs, axis=1)) + peak
        mag = float(np.max(np.abs(c))) + 2.0 * abs(t) * float(np.max(np.abs(logd))) + 1.0
        margin = 16.0 * _EPS * mag + 4.0 * _EPS * float(lens.max()) + 1e-15
        lower[:, gi] = s - margin
        upper[:, gi] = s + margin
    for i in np.nonzero(~gridded)[0]:
        last = None if graph.ends[i] == 0 else int(graph.ends[i])
        encs = []
        for y in (0.0, 1.0):
            res = log_series(MoebiusLaw(sys, wp.psi, t, beta, y), int(graph.starts[i]), last, eps=1e-6)
            if res.kind != "finite":
                raise DivergenceError("lumped symbol tail diverges")
            encs.append(res.log_sum)
        lower[:, i] = min(encs[0].lo, encs[1].lo)
        upper[:, i] = max(encs[0].hi, encs[1].hi)
    return lower, upper


def _cw(mat, v, slack, cuts=(1e-16,)):
    w = mat @ v
    hi = float(np.max(w / v * (1.0 + slack)))
    # lower bounds on principal submatrices of the heavier states:
    # rho(M) >= rho(M_SS) for every S, so the best over several cut-offs is valid.
    # Light states (underflowed or barely reachable) would otherwise pin the min.
    lo, top = 0.0, float(v.max())
    for cut in cuts:
        keep = v > cut * top
        ws = mat @ np.where(keep, v, 0.0)
        lo = max(lo, float(np.min(ws[keep] / v[keep] * (1.0 - slack[keep]))))
    return lo, hi, w


_ALL_CUTS = (1e-200, 1e-100, 1e-40, 1e-16, 1e-8)


def _perron_vector(mat, v):
    """Leading eigenvector from ARPACK (dense for small matrices), or ``None``."""
    n = mat.shape[0]
    try:
        if n <= 400:
            vals, vecs = np.linalg.eig(mat.toarray())
        else:
            vals, vecs = splinalg.eigs(mat, k=1, which="LM", v0=v, tol=1e-13, maxiter=20 * n)
    except (splinalg.ArpackNoConvergence, np.linalg.LinAlgError):
        return None
    x = np.abs(np.real(vecs[:, int(np.argmax(np.abs(vals)))]))
    if not np.all(np.isfinite(x)) or x.max() <= 0:
        return None
    return np.maximum(x / x.max(), 1e-300)


def perron_bounds(mat: sparse.csr_matrix, v0: np.ndarray | None = None, rtol: float = 1e-9,
                  maxit: int = 400, patience: int = 20) -> tuple[float, float, np.ndarray]:
    """Collatz-Wielandt enclosure ``[min (Mv)_i/v_i, max (Mv)_i/v_i]`` of the spectral radius.

    The bounds hold for any positive ``v``. Power iteration improves ``v``;
    when it stalls (small spectral gap) the vector is replaced by an
    eigensolver estimate and iterated a little further. The lower ratio is
    taken over the states where ``v`` has not underflowed, on the
    corresponding principal submatrix.
    """
    n = mat.shape[0]
    v = np.ones(n) if v0 is None or len(v0) != n else np.maximum(v0, 1e-300)
    slack = 4.0 * _EPS * (np.diff(mat.indptr) + 2.0)
    lo, hi = 0.0, math.inf
    best, stale, solved = math.inf, 0, False
    for it in range(maxit):
        l, h, w = _cw(mat, v, slack)
        lo, hi = max(lo, l), min(hi, h)
        gap = hi / lo - 1.0 if lo > 0 else math.inf
        if gap <= rtol:
            break
        if gap < 0.5 * best:
            best, stale = gap, 0
        else:
            stale += 1
        if stale >= patience:
            if solved or gap < 1e-6:
                break
            x = _perron_vector(mat, v)
            solved, stale, best = True, 0, math.inf
            if x is not None:
                v = x
                continue
        v = np.maximum(w / np.max(w), 1e-300)
    l, h, _ = _cw(mat, v, slack, _ALL_CUTS)
    return max(lo, l), min(hi, h), v


_LOCAL = threading.local()


def _warm() -> dict:
    """Per-thread cache of Perron vectors used as warm starts."""
    if not hasattr(_LOCAL, "warm"):
        _LOCAL.warm = {}
    return _LOCAL.warm


def reset_warm_starts() -> None:
    """Forget warm starts so that a computation does not depend on earlier ones."""
    _warm().clear()


def cylinder_transfer_bounds(wp: WeightedPotential, delta: float, max_states: int = 120_000,
                             m0: int = 64, y_grid: int = 257) -> Enclosure:
    """Pressure enclosure for a Möbius system from the cylinder code at ``delta``."""
    sys, t, beta = wp.system, float(wp.t), float(wp.beta)
    if not sys.is_moebius:
        raise ValueError(f"{sys.label} is not a Möbius family")
    if sys.alphabet is not None:
        m0 = min(m0, sys.alphabet)
    g = cylinder_graph(sys, m0, delta, max_states)
    explicit = g.sym <= m0
    e = g.sym[explicit].astype(float)
    s = g.src[explicit]
    d = sys.shift(e)
    c = beta * wp.psi.value(e) if beta != 0.0 else np.zeros_like(e)
    at_lo = -2.0 * np.log(d + g.lo[s])
    at_hi = -2.0 * np.log(d + g.hi[s])
    big, small = (at_lo, at_hi) if t >= 0 else (at_hi, at_lo)
    err = 8.0 * _EPS * (np.abs(c) + abs(t) * np.abs(at_lo) + 1.0)
    lg_sup = np.empty(len(g.sym))
    lg_inf = np.empty(len(g.sym))
    lg_sup[explicit] = t * big + c + err
    lg_inf[explicit] = t * small + c - err
    if not explicit.all():
        ys = np.linspace(0.0, 1.0, y_grid)
        s_lo, s_hi = group_log_sums(wp, g, ys)
        f = g.sym[~explicit] - m0 - 1
        bs = g.src[~explicit]
        scale = y_grid - 1
        i_floor = np.clip(np.floor(g.lo[bs] * scale).astype(np.int64), 0, scale)
        i_ceil = np.clip(np.ceil(g.hi[bs] * scale).astype(np.int64), 0, scale)
        # group sums decrease in y for t >= 0 and increase for t < 0
        sup_i, inf_i = (i_floor, i_ceil) if t >= 0 else (i_ceil, i_floor)
        lg_sup[~explicit] = s_hi[sup_i, f]
        lg_inf[~explicit] = s_lo[inf_i, f]
    shift = float(np.max(lg_sup))
    n = g.n_states
    key = (sys, m0, delta)
    bounds = {}
    for name, lg in (("sup", lg_sup), ("inf", lg_inf)):
        vals = np.exp(lg - shift)
        if name == "sup":
            vals = np.maximum(vals, 5e-324)
        mat = sparse.csr_matrix((vals, g.src, g.indptr), shape=(n, n))
        cache = _warm()
        bounds[name] = perron_bounds(mat, cache.get(key + (name,)))
        if len(cache) > 64:
            cache.clear()
        cache[key + (name,)] = bounds[name][2]
    sup_hi = bounds["sup"][1]
    inf_lo = bounds["inf"][0]
    lower = -math.inf if inf_lo <= 0 else down(math.log(inf_lo) + shift, 2)
    return Enclosure(lower, up(math.log(sup_hi) + shift, 2))
