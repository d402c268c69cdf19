"""Path sampling, supremum statistics and draws of the limiting pair."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .attraction import Attractor, Brownian, LinearDrift, StrictlyStable
from .model import CompoundPoisson, Empty, LevyModel

BOOTSTRAP_DELTA = 2.0 ** -18
BOOTSTRAP_EPS = 2.0 ** -10
# per-block probability of missing the maximum in the local Brownian refinement
_MISS_PROB = 1e-12


class AlignmentError(ValueError):
    pass


class OutOfRange(IndexError):
    pass


class WindowTooSmall(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# random streams

def label_key(label: str) -> int:
    return int.from_bytes(hashlib.sha256(label.encode()).digest()[:8], "little")


@dataclass(frozen=True)
class RngStream:
    """Independent substream addressed by (seed, label, stream id)."""

    seed: int
    stream_id: int = 0
    label: str = ""

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64 or self.stream_id < 0:
            raise ValueError("seed must fit in 64 bits and stream id must be nonnegative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(label_key(self.label), int(self.stream_id)))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, label: str) -> "RngStream":
        return RngStream(self.seed, self.stream_id, f"{self.label}/{label}")


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or numpy Generator")


# ---------------------------------------------------------------------------
# increments and grid paths

def sample_increment(model: LevyModel, dt: float, rng) -> float:
    """One draw of X_dt."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    return float(model.sample_increments(dt, as_generator(rng), 1)[0])


@dataclass(frozen=True)
class GridPath:
    """X on the grid j*delta, j = 0..n; ``sigma`` is the Gaussian coefficient."""

    delta: float
    values: np.ndarray
    sigma: float = 0.0

    @property
    def n(self) -> int:
        return len(self.values) - 1

    @property
    def T(self) -> float:
        return self.delta * self.n


def _steps(T: float, h: float) -> int:
    n = int(round(T / h))
    if n < 1 or abs(n * h - T) > 1e-9 * T:
        raise AlignmentError(f"horizon {T} is not a multiple of step {h}")
    return n


def simulate_grid_path(model: LevyModel, T: float, delta: float, rng) -> GridPath:
    if not 0 < delta <= T:
        raise ValueError("need 0 < delta <= T")
    n = _steps(T, delta)
    inc = model.sample_increments(delta, as_generator(rng), n)
    values = np.empty(n + 1)
    values[0] = 0.0
    np.cumsum(inc, out=values[1:])
    return GridPath(delta, values, model.sigma)


# ---------------------------------------------------------------------------
# suprema

@dataclass(frozen=True)
class SupremumStats:
    M: float
    tau: float
    M_eps: float
    tau_eps: float
    delta: float          # M - M_eps
    boundary_flag: bool
    eps: float
    T: float


def _last_argmax(x: np.ndarray) -> int:
    return len(x) - 1 - int(np.argmax(x[::-1]))


def _bridge_max(left: np.ndarray, right: np.ndarray, var: float, u: np.ndarray) -> np.ndarray:
    # maximum of a Brownian bridge with variance ``var`` between the given endpoints
    d = right - left
    return 0.5 * (left + right + np.sqrt(d * d - 2.0 * var * np.log(u)))


def path_supremum(path: GridPath, bridge_refine: bool = False, rng=None) -> tuple[float, float]:
    """(M, tau) from the delta grid, optionally using exact bridge maxima per interval."""
    x = path.values
    if bridge_refine and path.sigma > 0:
        if rng is None:
            raise ValueError("bridge refinement needs an rng")
        u = 1.0 - as_generator(rng).random(path.n)
        bm = _bridge_max(x[:-1], x[1:], path.sigma ** 2 * path.delta, u)
        j = _last_argmax(bm)
        return float(bm[j]), (j + (1 if x[j + 1] >= x[j] else 0)) * path.delta
    j = _last_argmax(x)
    return float(x[j]), j * path.delta


def _ratio(eps: float, delta: float) -> int:
    r = eps / delta
    ri = int(round(r))
    if ri < 1 or abs(r - ri) > 1e-9 * r:
        raise AlignmentError(f"eps={eps} is not a positive multiple of the grid step {delta}")
    return ri


def discrete_supremum(path: GridPath, eps: float) -> tuple[float, float]:
    r = _ratio(eps, path.delta)
    sub = path.values[::r]
    j = _last_argmax(sub)
    return float(sub[j]), j * r * path.delta


def supremum_stats(path: GridPath, eps: float, bridge_refine: bool = False, rng=None,
                   margin: float | None = None, sup: tuple[float, float] | None = None) -> SupremumStats:
    """M, tau, M_eps, tau_eps and Delta_eps on one path; ``sup`` reuses a computed (M, tau)."""
    m_eps, tau_eps = discrete_supremum(path, eps)
    M, tau = sup if sup is not None else path_supremum(path, bridge_refine, rng)
    return _stats(M, tau, m_eps, tau_eps, eps, path.T, margin)


def _stats(M, tau, m_eps, tau_eps, eps, T, margin) -> SupremumStats:
    M = max(M, m_eps)
    margin = 2.0 * eps if margin is None else margin
    flag = tau < margin or tau > T - margin
    return SupremumStats(float(M), float(tau), float(m_eps), float(tau_eps), float(M - m_eps),
                         bool(flag), float(eps), float(T))


def zoom_window(path: GridPath, stats: SupremumStats, a_eps: float, t_grid) -> np.ndarray:
    """(X_{tau + t eps} - M) / a_eps by nearest grid lookup."""
    t = np.asarray(t_grid, dtype=float)
    idx = np.rint((stats.tau + t * stats.eps) / path.delta).astype(np.int64)
    if np.any(idx < 0) or np.any(idx > path.n):
        raise OutOfRange("tau + t*eps leaves [0, T]")
    return (path.values[idx] - stats.M) / a_eps


# ---------------------------------------------------------------------------
# path engines used by the experiments
#
# Each returns (M, tau, M_eps[k], tau_eps[k]) for the sorted eps ladder.

def engine_for(model: LevyModel, prefer: str = "auto") -> str:
    if prefer not in ("auto", "grid"):
        raise ValueError(f"unknown engine {prefer!r}")
    if prefer == "grid":
        return "grid"
    if model.sigma2 > 0 and isinstance(model.jumps, Empty):
        return "brownian"
    if model.sigma2 == 0 and model.components() and \
            all(isinstance(c, CompoundPoisson) for c in model.components()):
        return "finite"
    return "grid"


def grid_engine(model, T, eps_list, k, bridge, gen):
    delta = min(eps_list) / 2 ** k
    path = simulate_grid_path(model, T, delta, gen)
    M, tau = path_supremum(path, bridge, gen)
    sups = [discrete_supremum(path, e) for e in eps_list]
    return M, tau, np.array([s[0] for s in sups]), np.array([s[1] for s in sups])


def brownian_engine(model, T, eps_list, k, bridge, gen):
    """Gaussian paths: coarse grid plus bridge refinement of blocks that can hold the maximum.

    Blocks whose bridge exceeds the coarse maximum with probability below
    ``_MISS_PROB`` are never refined, so the result matches the full fine grid
    except on an event of negligible probability.
    """
    mu = model.gamma
    sigma = model.sigma
    e0 = min(eps_list)
    n = _steps(T, e0)
    X = np.empty(n + 1)
    X[0] = 0.0
    np.cumsum(gen.normal(mu * e0, sigma * math.sqrt(e0), n), out=X[1:])
    sups = []
    for e in eps_list:
        r = _ratio(e, e0)
        sub = X[::r]
        j = _last_argmax(sub)
        sups.append((sub[j], j * e))
    M0 = X.max()
    thr = 0.5 * sigma ** 2 * e0 * math.log(1.0 / _MISS_PROB)
    gl, gr = M0 - X[:-1], M0 - X[1:]
    cand = np.flatnonzero(gl * gr < thr)
    m = 2 ** k
    h = e0 / m
    frac = np.arange(m + 1) / m
    best, tau = -math.inf, 0.0
    for c in cand:
        W = np.empty(m + 1)
        W[0] = 0.0
        np.cumsum(gen.normal(0.0, sigma * math.sqrt(h), m), out=W[1:])
        vals = X[c] + (X[c + 1] - X[c]) * frac + (W - frac * W[-1])
        if bridge:
            bm = _bridge_max(vals[:-1], vals[1:], sigma * sigma * h, 1.0 - gen.random(m))
            j = _last_argmax(bm)
            mc, tc = bm[j], c * e0 + (j + (1 if vals[j + 1] >= vals[j] else 0)) * h
        else:
            j = _last_argmax(vals)
            mc, tc = vals[j], c * e0 + j * h
        if mc >= best:
            best, tau = float(mc), float(tc)
    return best, tau, np.array([s[0] for s in sups]), np.array([s[1] for s in sups])


def finite_activity_engine(model, T, eps_list, k, bridge, gen):
    """Compound Poisson plus drift: exact piecewise-linear path and exact supremum."""
    cpp = model.components()
    drift = model.gamma - sum(c.small_mean() for c in cpp)
    times, sizes = [], []
    for c in cpp:
        nj = gen.poisson(c.rate * T)
        times.append(gen.uniform(0.0, T, nj))
        sizes.append(c.law.sample(gen, nj))
    t = np.concatenate(times)
    order = np.argsort(t, kind="stable")
    t = t[order]
    J = np.cumsum(np.concatenate(sizes)[order])
    Jl = np.concatenate([[0.0], J[:-1]])
    cand_t = np.concatenate([[0.0], t, t, [T]])
    cand_x = np.concatenate([[0.0], drift * t + Jl, drift * t + J, [drift * T + (J[-1] if len(J) else 0.0)]])
    order = np.argsort(cand_t, kind="stable")
    cand_t, cand_x = cand_t[order], cand_x[order]
    j = _last_argmax(cand_x)
    M, tau = float(cand_x[j]), float(cand_t[j])
    Jc = np.concatenate([[0.0], J])
    m_eps, tau_eps = [], []
    for e in eps_list:
        n = _steps(T, e)
        tg = np.arange(n + 1) * e
        xg = drift * tg + Jc[np.searchsorted(t, tg, side="right")]
        i = _last_argmax(xg)
        m_eps.append(xg[i])
        tau_eps.append(tg[i])
    return M, tau, np.array(m_eps), np.array(tau_eps)


ENGINES = {"grid": grid_engine, "brownian": brownian_engine, "finite": finite_activity_engine}


# ---------------------------------------------------------------------------
# Bessel(3) and the limiting pair

def sample_bessel3(times, rng, size: int | None = None, scale: float = 1.0) -> np.ndarray:
    """Bessel(3) from 0 at the given times, as the norm of a 3-d Gaussian walk."""
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or np.any(t < 0) or np.any(np.diff(t) < 0):
        raise ValueError("times must be a sorted nonnegative 1-d array")
    dt = np.diff(t, prepend=0.0)
    gen = as_generator(rng)
    shape = (len(t), 3) if size is None else (size, len(t), 3)
    steps = gen.standard_normal(shape) * np.sqrt(dt)[:, None]
    return scale * np.linalg.norm(np.cumsum(steps, axis=-2), axis=-1)


@dataclass(frozen=True)
class LimitPair:
    v: float
    w: float
    u: float


@dataclass(frozen=True)
class LimitSample:
    v: np.ndarray
    w: np.ndarray
    u: np.ndarray
    rejected: int
    method: str

    def pair(self, i: int) -> LimitPair:
        return LimitPair(float(self.v[i]), float(self.w[i]), float(self.u[i]))


def _walk3(offsets: np.ndarray, K: int, gen) -> np.ndarray:
    # Bessel(3) from 0 at times offset + m, m = 0..K-1 (one row per offset)
    n = len(offsets)
    t = offsets[:, None] + np.arange(K)
    dt = np.diff(t, axis=1, prepend=0.0)
    steps = gen.standard_normal((n, K, 3)) * np.sqrt(dt)[..., None]
    return np.linalg.norm(np.cumsum(steps, axis=1), axis=-1)


def _killed_step(a: float, j: float, h: float, gen):
    """Brownian step of length h from a > j, stopped at level j.

    Returns ("hit", s) with the hitting time s <= h, or ("at", b) with the
    endpoint b > j given no hit.
    """
    d = (a - j) / math.sqrt(h)
    tail = special.ndtr(-d)
    if gen.random() < 2.0 * tail:
        # T = (a - j)^2 / Z^2 conditioned on |Z| >= d
        z = -special.ndtri(gen.random() * tail)
        return "hit", (a - j) ** 2 / (z * z)
    while True:
        b = a + math.sqrt(h) * gen.standard_normal()
        if b > j and gen.random() >= math.exp(-2.0 * (a - j) * (b - j) / h):
            return "at", b


def _bessel_tail(r: float, best: float, gen, K: int) -> tuple[float, float]:
    """Minimum of a Bessel(3) path over the grid 1, 2, ... after a point at level r.

    Only values below ``best`` matter; returns (min, grid offset) or (inf, nan).
    Uses the future-infimum decomposition: the infimum J is uniform on (0, r),
    the path runs as Brownian motion down to J and then as J + Bessel(3).
    """
    out_v, out_t = math.inf, math.nan
    t = 0.0                      # time since the starting grid point
    base = 0.0                   # level added to the current Bessel piece
    while True:
        J = r * gen.random()
        if base + J >= best:
            return out_v, out_t
        # Brownian phase from r down to J (levels relative to base)
        a, hi = r, best - base
        while True:
            if a > hi + 3.0:
                lvl = hi + 1.0
                z = gen.standard_normal()
                t += (a - lvl) ** 2 / (z * z)
                a = lvl
                h = math.ceil(t) - t
                if h <= 0:
                    continue
            else:
                h = 1.0 if t == math.floor(t) else math.ceil(t) - t
            kind, val = _killed_step(a, J, h, gen)
            if kind == "hit":
                t += val
                break
            t += h
            t = float(round(t)) if abs(t - round(t)) < 1e-9 else t
            a = val
            if base + a < best:
                best = out_v = base + a
                out_t = t
        # fresh Bessel(3) from level base + J at time t; grid points ceil(t), ...
        base += J
        s0 = math.ceil(t) - t
        if s0 <= 0:
            s0 = 1.0
        R = _walk3(np.array([s0]), K, gen)[0]
        idx = int(np.argmin(R))
        if base + R[idx] < best:
            best = out_v = base + R[idx]
            out_t = t + s0 + idx
        r = float(R[-1])
        t = t + s0 + (len(R) - 1)


def _brownian_pairs(sigma_hat, n, K, gen, exact_tail=True):
    U = gen.random(n)
    t_post = U[:, None] + np.arange(K + 1)
    t_pre = np.arange(1, K + 1) - U[:, None]
    post = np.linalg.norm(np.cumsum(gen.standard_normal((n, K + 1, 3))
                                    * np.sqrt(np.diff(t_post, axis=1, prepend=0.0))[..., None], axis=1), axis=-1)
    pre = np.linalg.norm(np.cumsum(gen.standard_normal((n, K, 3))
                                   * np.sqrt(np.diff(t_pre, axis=1, prepend=0.0))[..., None], axis=1), axis=-1)
    # |xi| at U+i for i = -K..K; the maximum of xi is the minimum of |xi|
    r = np.concatenate([pre[:, ::-1], post], axis=1)
    j = r.shape[1] - 1 - np.argmin(r[:, ::-1], axis=1)
    idx = (j - K).astype(float)
    v = r[np.arange(n), j]
    if exact_tail:
        for row in range(n):
            for side, end in ((1, post[row, -1]), (-1, pre[row, -1])):
                m, off = _bessel_tail(float(end), float(v[row]), gen, 20)
                if m < v[row]:
                    v[row] = m
                    idx[row] = side * (K + off)
        bad = np.zeros(n, dtype=bool)
    else:
        bad = np.abs(idx) == K
    return -sigma_hat * v, U + idx, U, bad


def _stable_bootstrap(att: StrictlyStable, n, gen, margin_factor=2.0):
    model = att.model
    a = BOOTSTRAP_EPS ** (1.0 / att.alpha)
    v, w, rej = np.empty(n), np.empty(n), 0
    i = 0
    while i < n:
        M, tau, me, te = grid_engine(model, 1.0, [BOOTSTRAP_EPS], 0 if BOOTSTRAP_DELTA == BOOTSTRAP_EPS
                                     else int(round(math.log2(BOOTSTRAP_EPS / BOOTSTRAP_DELTA))), False, gen)
        margin = margin_factor * BOOTSTRAP_EPS
        if tau < margin or tau > 1.0 - margin:
            rej += 1
            continue
        v[i] = -(max(M, me[0]) - me[0]) / a
        w[i] = (te[0] - tau) / BOOTSTRAP_EPS
        i += 1
    return v, w, rej


def sample_limit_pairs(attractor: Attractor, n: int, K: int = 20, rng=None,
                       exact_tail: bool = True) -> LimitSample:
    """n independent draws of (max_i xi_{U+i}, U + argmax_i xi_{U+i}).

    Brownian case: xi is minus a two-sided Bessel(3) observed in a window of
    K points per side; with ``exact_tail`` the grid beyond the window is
    handled exactly, otherwise draws whose argmax hits the window edge are
    rejected and redrawn.
    """
    if n < 1 or K < 1:
        raise ValueError("need n >= 1 and K >= 1")
    gen = as_generator(rng)
    if isinstance(attractor, Brownian):
        v, w, u = np.empty(n), np.empty(n), np.empty(n)
        filled, rejected = 0, 0
        while filled < n:
            need = n - filled
            vv, ww, uu, bad = _brownian_pairs(attractor.sigma_hat, need, K, gen, exact_tail)
            rejected += int(bad.sum())
            keep = ~bad
            m = int(keep.sum())
            v[filled:filled + m], w[filled:filled + m], u[filled:filled + m] = vv[keep], ww[keep], uu[keep]
            filled += m
            if rejected > 10 * n + 100:
                raise WindowTooSmall(f"argmax hit the window edge {rejected} times with K={K}")
        return LimitSample(v, w, u, rejected, "bessel3")
    if isinstance(attractor, LinearDrift) or (isinstance(attractor, StrictlyStable) and attractor.monotone != "none"):
        u = gen.random(n)
        if isinstance(attractor, LinearDrift):
            up = attractor.gamma_hat > 0
            xhat = lambda s: attractor.gamma_hat * s
        else:
            up = attractor.monotone == "increasing"
            model = attractor.model
            z = model.sample_increments(1.0, gen, n)
            xhat = lambda s: s ** (1.0 / attractor.alpha) * z
        if up:
            s = 1.0 - u
            return LimitSample(-xhat(s), -s, u, 0, "reduced")
        return LimitSample(xhat(u), u.copy(), u, 0, "reduced")
    if isinstance(attractor, StrictlyStable):
        v, w, rej = _stable_bootstrap(attractor, n, gen)
        return LimitSample(v, w, w - np.floor(w), rej, "bootstrap")
    raise ValueError(f"no limit pair for {attractor.variant}")


def sample_limit_pair(attractor: Attractor, K: int = 20, rng=None) -> LimitPair:
    return sample_limit_pairs(attractor, 1, K, rng).pair(0)
