"""Monte Carlo experiments for the discretization error of the supremum."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .attraction import (
    Attractor, Brownian, LinearDrift, ScalingFunction, StrictlyStable, classify,
)
from .distributions import EmpiricalDistribution, ks_distance, uniform_cdf, wasserstein1
from .model import LevyModel, ModelError
from .samplers import (
    BOOTSTRAP_DELTA, BOOTSTRAP_EPS, ENGINES, LimitSample, RngStream, engine_for,
    sample_limit_pairs,
)

REFINE_FLOOR = 2.0 ** -24      # smallest fine-grid step, relative to T
PATH_CHUNK = 64
LIMIT_CHUNK = 4096
BOOTSTRAP_CHUNK = 16


class ConfigError(ValueError):
    pass


def default_threads() -> int:
    raw = os.environ.get("LEVYZOOM_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"LEVYZOOM_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("LEVYZOOM_THREADS must be >= 1")
    return n


def parse_eps_grid(spec: str) -> list[float]:
    """'lo:hi:logstepN' -> lo, lo*N^(+-1), ... ending at hi (either order)."""
    try:
        lo_s, hi_s, step_s = spec.split(":")
        lo, hi = float(lo_s), float(hi_s)
        if not step_s.startswith("logstep"):
            raise ValueError
        base = float(step_s[len("logstep"):])
    except ValueError:
        raise ConfigError(f"bad eps grid {spec!r}; expected lo:hi:logstepN") from None
    if not (lo > 0 and hi > 0 and base > 1):
        raise ConfigError("eps grid needs positive ends and a base > 1")
    k = math.log(hi / lo) / math.log(base)
    n = int(round(abs(k)))
    if abs(abs(k) - n) > 1e-9:
        raise ConfigError(f"{hi:g}/{lo:g} is not a power of {base:g}")
    sign = 1 if hi >= lo else -1
    return [lo * base ** (sign * i) for i in range(n + 1)]


# ---------------------------------------------------------------------------
# configuration

_CONFIG_KEYS = {"model", "T", "eps", "refine_k", "n", "seed", "margin", "bridge", "engine",
                "reference", "n_reference", "k_window", "name"}


@dataclass(frozen=True)
class ExperimentConfig:
    model: LevyModel
    eps: tuple[float, ...]
    n: int = 10_000
    seed: int = 0
    T: float = 1.0
    refine_k: int = 7
    margin: float = 2.0          # boundary margin in units of eps
    bridge: bool = True
    engine: str = "auto"
    reference: str | None = None
    n_reference: int = 100_000
    k_window: int = 20
    name: str = "experiment"

    def __post_init__(self):
        eps = tuple(sorted(float(e) for e in self.eps))
        object.__setattr__(self, "eps", eps)
        if not eps:
            raise ConfigError("eps list is empty")
        if self.n < 1 or self.n_reference < 1:
            raise ConfigError("path counts must be >= 1")
        if not self.T > 0 or self.refine_k < 0 or self.margin < 0 or self.k_window < 1:
            raise ConfigError("T > 0, refine_k >= 0, margin >= 0 and k_window >= 1 are required")
        if not 0 <= self.seed < 2 ** 63:
            raise ConfigError("seed must be a nonnegative 63-bit integer")
        e0 = eps[0]
        for e in eps:
            r = e / e0
            j = round(math.log2(r))
            if abs(r - 2.0 ** j) > 1e-12 * r:
                raise ConfigError(f"eps {e:g} is not a power-of-two multiple of {e0:g}")
            if e >= self.T:
                raise ConfigError(f"eps {e:g} leaves no interior grid on [0, {self.T:g}]")
            steps = self.T / e
            if abs(steps - round(steps)) > 1e-9 * steps:
                raise ConfigError(f"T is not a multiple of eps {e:g}")
        if self.delta < self.T * REFINE_FLOOR * (1 - 1e-12):
            raise ConfigError(f"refinement step {self.delta:g} below the floor T*2^-24")
        if self.engine not in ("auto", "grid"):
            raise ConfigError("engine must be 'auto' or 'grid'")
        if self.reference not in (None, "bessel", "uniform", "bootstrap"):
            raise ConfigError("reference must be bessel, uniform or bootstrap")
        if self.engine_name != "finite" and not self.model.has_exact_sampler:
            raise ConfigError("model has no exact increment sampler")

    @property
    def delta(self) -> float:
        return self.eps[0] / 2 ** self.refine_k

    @property
    def engine_name(self) -> str:
        return engine_for(self.model, self.engine)

    def to_dict(self) -> dict:
        return {"model": self.model.to_dict(), "eps": list(self.eps), "n": self.n, "seed": self.seed,
                "T": self.T, "refine_k": self.refine_k, "margin": self.margin, "bridge": self.bridge,
                "engine": self.engine, "reference": self.reference, "n_reference": self.n_reference,
                "k_window": self.k_window, "name": self.name}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        extra = set(d) - _CONFIG_KEYS
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        if "model" not in d or "eps" not in d:
            raise ConfigError("config needs 'model' and 'eps'")
        try:
            model = LevyModel.from_dict(d["model"])
        except ModelError as exc:
            raise ConfigError(f"bad model: {exc}") from None
        eps = d["eps"]
        eps = parse_eps_grid(eps) if isinstance(eps, str) else eps
        kw = {k: d[k] for k in d if k not in ("model", "eps")}
        try:
            for key, typ in (("n", int), ("seed", int), ("refine_k", int), ("n_reference", int),
                             ("k_window", int), ("T", float), ("margin", float)):
                if key in kw:
                    if isinstance(kw[key], bool) or not isinstance(kw[key], (int, float)):
                        raise ConfigError(f"{key} must be a number")
                    if typ is int and float(kw[key]) != int(kw[key]):
                        raise ConfigError(f"{key} must be an integer")
                    kw[key] = typ(kw[key])
            if "bridge" in kw and not isinstance(kw["bridge"], bool):
                raise ConfigError("bridge must be true or false")
            return cls(model=model, eps=tuple(float(e) for e in eps), **kw)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# error experiment

@dataclass(frozen=True)
class EpsResult:
    eps: float
    a_eps: float
    delta_over_a: np.ndarray      # all paths, in path order
    tau_gap: np.ndarray           # (tau_eps - tau) / eps
    tau_frac: np.ndarray          # fractional part of tau / eps
    boundary: np.ndarray

    @property
    def n_boundary(self) -> int:
        return int(self.boundary.sum())

    @property
    def retained(self) -> np.ndarray:
        return ~self.boundary

    def delta_dist(self) -> EmpiricalDistribution:
        return EmpiricalDistribution(self.delta_over_a[self.retained])

    def gap_dist(self) -> EmpiricalDistribution:
        return EmpiricalDistribution(self.tau_gap[self.retained])


@dataclass(frozen=True)
class ErrorResult:
    config: ExperimentConfig
    attractor: Attractor
    per_eps: tuple[EpsResult, ...]
    engine: str

    def at(self, eps: float) -> EpsResult:
        for r in self.per_eps:
            if math.isclose(r.eps, eps, rel_tol=1e-12):
                return r
        raise KeyError(eps)


def _map_chunks(fn, n_items: int, chunk: int, threads: int):
    chunks = [(s, min(s + chunk, n_items)) for s in range(0, n_items, chunk)]
    if threads <= 1 or len(chunks) == 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, chunks))


def _attractor_for(model: LevyModel) -> tuple[Attractor, ScalingFunction]:
    att = classify(model)
    if not att.is_limit:
        raise ConfigError(f"model has no small-time attractor ({att.variant}: {att.params().get('diagnostic', '')})")
    return att, ScalingFunction(model, att)


def simulate_paths(model: LevyModel, T: float, eps: tuple[float, ...], refine_k: int, bridge: bool,
                   n: int, seed: int, engine: str = "auto", label: str = "error", threads: int = 1):
    """Per-path (M, tau) and per-(path, eps) (M_eps, tau_eps) arrays."""
    name = engine_for(model, engine)
    fn = ENGINES[name]

    def work(span):
        out = []
        for i in range(*span):
            gen = RngStream(seed, i, label).generator()
            out.append(fn(model, T, list(eps), refine_k, bridge, gen))
        return out

    rows = [r for part in _map_chunks(work, n, PATH_CHUNK, threads) for r in part]
    M = np.array([r[0] for r in rows])
    tau = np.array([r[1] for r in rows])
    M_eps = np.array([r[2] for r in rows]).reshape(n, len(eps))
    tau_eps = np.array([r[3] for r in rows]).reshape(n, len(eps))
    return name, M, tau, M_eps, tau_eps


def run_error_experiment(config: ExperimentConfig, threads: int | None = None) -> ErrorResult:
    """N paths; for every eps the pair (Delta_eps / a_eps, (tau_eps - tau) / eps)."""
    threads = default_threads() if threads is None else threads
    att, scale = _attractor_for(config.model)
    name, M, tau, M_eps, tau_eps = simulate_paths(
        config.model, config.T, config.eps, config.refine_k, config.bridge, config.n, config.seed,
        config.engine, "error", threads)
    per = []
    for k, e in enumerate(config.eps):
        a = scale(e)
        d = np.maximum(M - M_eps[:, k], 0.0)
        margin = config.margin * e
        flag = (tau < margin) | (tau > config.T - margin)
        q = tau / e
        per.append(EpsResult(e, a, d / a, (tau_eps[:, k] - tau) / e, q - np.floor(q), flag))
    return ErrorResult(config, att, tuple(per), name)


# ---------------------------------------------------------------------------
# limit experiment

@dataclass(frozen=True)
class LimitResult:
    attractor: Attractor
    v: np.ndarray                 # draw order
    w_raw: np.ndarray
    u: np.ndarray
    rejected: int
    method: str

    @property
    def minus_v(self) -> EmpiricalDistribution:
        return EmpiricalDistribution(-self.v)

    @property
    def w(self) -> EmpiricalDistribution:
        return EmpiricalDistribution(self.w_raw)


def run_limit_experiment(attractor: Attractor, n: int, K: int = 20, seed: int = 0,
                         threads: int | None = None) -> LimitResult:
    threads = default_threads() if threads is None else threads
    boot = isinstance(attractor, StrictlyStable) and attractor.monotone == "none"
    chunk = BOOTSTRAP_CHUNK if boot else LIMIT_CHUNK

    def work(span):
        gen = RngStream(seed, span[0] // chunk, "limit").generator()
        return sample_limit_pairs(attractor, span[1] - span[0], K, gen)

    parts: list[LimitSample] = _map_chunks(work, n, chunk, threads)
    v = np.concatenate([p.v for p in parts])
    w = np.concatenate([p.w for p in parts])
    u = np.concatenate([p.u for p in parts])
    return LimitResult(attractor, v, w, u, sum(p.rejected for p in parts), parts[0].method)


# ---------------------------------------------------------------------------
# fractional part of tau / eps

def tau_fraction_check(model: LevyModel, T: float, eps: float, n: int, seed: int,
                       refine_k: int = 7, margin: float = 2.0, threads: int | None = None) -> dict:
    """KS distance of {tau/eps} over non-boundary paths against uniform(0, 1)."""
    if not 0 < eps < T:
        raise ConfigError("eps must lie strictly inside (0, T); a single interval has no interior grid")
    threads = default_threads() if threads is None else threads
    _, _, tau, _, _ = simulate_paths(model, T, (eps,), refine_k, True, n, seed, "auto", "tau", threads)
    keep = (tau >= margin * eps) & (tau <= T - margin * eps)
    q = tau[keep] / eps
    frac = q - np.floor(q)
    return {"eps": eps, "n": n, "retained": int(keep.sum()), "ks": ks_distance(frac, uniform_cdf)}


# ---------------------------------------------------------------------------
# reports

def default_reference(att: Attractor) -> str:
    if isinstance(att, Brownian):
        return "bessel"
    if isinstance(att, LinearDrift):
        return "uniform"
    return "bootstrap"


def _ext(x: float):
    return None if (x is None or math.isnan(x)) else float(x)


def convergence_report(config: ExperimentConfig, reference: str | None = None,
                       threads: int | None = None, result: ErrorResult | None = None,
                       limit: LimitResult | None = None) -> dict:
    """Per-eps distances between the error experiment and the limit law."""
    threads = default_threads() if threads is None else threads
    result = result if result is not None else run_error_experiment(config, threads)
    att = result.attractor
    ref = reference or config.reference or default_reference(att)
    notes = []
    if ref == "uniform":
        if not isinstance(att, LinearDrift):
            raise ConfigError("uniform reference applies to the linear drift attractor only")
        g = abs(att.gamma_hat)
        ref_cdf = lambda x: uniform_cdf(np.asarray(x) / g)
        ref_v = ref_w = None
    else:
        if ref == "bessel" and not isinstance(att, Brownian):
            raise ConfigError("bessel reference applies to the Brownian attractor only")
        if ref == "bootstrap" and not isinstance(att, StrictlyStable):
            raise ConfigError("bootstrap reference applies to stable attractors only")
        if limit is None:
            n_ref = config.n_reference
            limit = run_limit_experiment(att, n_ref, config.k_window, config.seed, threads)
        ref_cdf, ref_v, ref_w = None, limit.minus_v, limit.w
        if limit.method == "bootstrap":
            notes.append(f"bootstrap reference: the stable limit itself simulated with mesh "
                         f"{BOOTSTRAP_DELTA:g} and step {BOOTSTRAP_EPS:g}; approximate")
    rows = []
    for r in result.per_eps:
        dd = r.delta_dist()
        gd = r.gap_dist()
        row = {"eps": r.eps, "a_eps": r.a_eps, "n_paths": len(r.boundary),
               "n_boundary": r.n_boundary, "n_retained": len(dd),
               "mean_delta_over_a": dd.mean(), "se_delta_over_a": _ext(dd.std_error()),
               "mean_tau_gap": gd.mean(), "se_tau_gap": _ext(gd.std_error())}
        if ref_cdf is not None:
            row["ks_delta"] = ks_distance(dd, ref_cdf)
            row["ks_tau_gap"] = ks_distance(gd, lambda x: 1.0 - uniform_cdf(-np.asarray(x))) \
                if att.gamma_hat > 0 else ks_distance(gd, uniform_cdf)
        else:
            row["ks_delta"] = ks_distance(dd, ref_v)
            row["w1_delta"] = wasserstein1(dd, ref_v)
            row["ks_tau_gap"] = ks_distance(gd, ref_w)
        rows.append(row)
    warn = []
    ks = [row["ks_delta"] for row in sorted(rows, key=lambda x: -x["eps"])]
    if any(b > a for a, b in zip(ks, ks[1:])):
        warn.append("KS distance to the reference does not decrease along the eps ladder")
        warnings.warn(warn[-1], RuntimeWarning, stacklevel=2)
    meta = {"seed": config.seed, "version": __version__, "config_hash": config.digest(),
            "engine": result.engine, "attractor": _public(att.to_dict()), "reference": ref}
    if ref_v is not None:
        meta.update({"reference_n": len(ref_v), "reference_mean": ref_v.mean(),
                     "reference_se": _ext(ref_v.std_error()), "reference_rejected": limit.rejected})
    return {"metadata": meta, "per_eps": rows, "warnings": warn, "notes": notes,
            "tolerances": "distances are reported raw; pass thresholds are conventions of the caller"}


def _public(d: dict) -> dict:
    return {k: v for k, v in d.items() if k != "diagnostics"}


# ---------------------------------------------------------------------------
# output

def _fmt(x: float) -> str:
    return repr(float(x))


def error_csv(result: ErrorResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["eps", "delta_over_a", "tau_gap", "boundary_flag"])
    for r in result.per_eps:
        e = _fmt(r.eps)
        for d, g, b in zip(r.delta_over_a, r.tau_gap, r.boundary):
            w.writerow([e, _fmt(d), _fmt(g), int(b)])
    return buf.getvalue()


def limit_csv(res: LimitResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["minus_v", "w", "u"])
    for v, ww, uu in zip(res.v, res.w_raw, res.u):
        w.writerow([_fmt(-v), _fmt(ww), _fmt(uu)])
    return buf.getvalue()


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o)}")
