"""Small-time domain-of-attraction classifier and scaling functions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import (
    CompoundPoisson, DiscreteLaw, JumpLaw, LevyModel, ModelError,
    NormalLaw, PowerLogTail, StableTails, levy_tails,
    truncated_mean, truncated_variance,
)

PROTOCOL_NOTE = ("finite-grid convention: limits read off x = x0*2^-j (j <= depth) "
                 "by extrapolation in 1/|log x| with a last-8-within-tol fallback")


class BracketingFailure(RuntimeError):
    pass


class NonPositiveValue(ValueError):
    pass


class UndeterminedError(RuntimeError):
    pass


@dataclass(frozen=True)
class Tolerance:
    """Thresholds for the numeric limit tests.

    ``limit`` is the relative closeness used for "converged" and "is zero";
    ``depth`` is the number of halvings of the grid; ``tail`` is the number
    of trailing grid points used by the extrapolating fit.
    """

    limit: float = 0.02
    depth: int = 48
    tail: int = 16
    raw_window: int = 8
    snap: float = 0.02

    def __post_init__(self):
        if not 0 < self.limit < 1:
            raise ValueError("limit tolerance must lie in (0, 1)")
        if self.depth < self.tail + 1 or self.tail < 4 or self.raw_window < 3:
            raise ValueError("grid too short for the limit protocol")


# ---------------------------------------------------------------------------
# limit detection

@dataclass(frozen=True)
class LimitResult:
    kind: str          # "finite", "+inf", "-inf" or "none"
    value: float       # finite limit, +-inf, or nan
    how: str = ""

    @property
    def finite(self) -> bool:
        return self.kind == "finite"

    def is_zero(self, tol: float) -> bool:
        return self.finite and abs(self.value) <= tol

    def to_dict(self) -> dict:
        v = self.value
        return {"kind": self.kind, "value": None if math.isnan(v) else (str(v) if math.isinf(v) else v),
                "how": self.how}


def _quad_fit(t: np.ndarray, s: np.ndarray) -> tuple[float, float]:
    """Quadratic least squares in t; (value at t=0, max abs residual)."""
    scale = float(np.max(t))
    z = t / scale
    coef = np.polyfit(z, s, 2)
    resid = float(np.max(np.abs(np.polyval(coef, z) - s)))
    return float(coef[-1]), resid


def detect_limit(values, xs, tol: Tolerance = Tolerance(), toward: str = "zero") -> LimitResult:
    """Decide the limit of ``values`` along the grid ``xs`` as x -> 0 (or infinity).

    Slowly varying corrections are expansions in t = 1/|log x|, so the tail of
    the sequence is fitted by a quadratic in t and extrapolated to t = 0.  The
    reciprocal sequence is fitted the same way to recognize divergence.  When
    neither fit is clean the plain window rule is used: the last values lie
    within tol of their median (converged) or exceed 1/tol monotonically
    (diverged).  Otherwise the result is "none".
    """
    s_all = np.asarray(values, dtype=float)
    x_all = np.asarray(xs, dtype=float)
    n = tol.tail
    s, x = s_all[-n:], x_all[-n:]
    if not np.all(np.isfinite(s)):
        if np.all(np.isposinf(s)):
            return LimitResult("+inf", math.inf, "values infinite")
        if np.all(np.isneginf(s)):
            return LimitResult("-inf", -math.inf, "values infinite")
        return LimitResult("none", math.nan, "non-finite values")
    t = 1.0 / np.abs(np.log(x))
    eps = tol.limit

    med_tail = float(np.median(s))
    if np.max(np.abs(s - med_tail)) <= 1e-10 * (1.0 + abs(med_tail)):
        return LimitResult("finite", med_tail, "constant")

    # divergence: 1/s extrapolates to 0 while |s| grows
    same_sign = np.all(s > 0) or np.all(s < 0)
    if same_sign:
        a = np.abs(s)
        growing = np.all(np.diff(a) > 0) and a[-1] >= 1.05 * a[0]
        if growing:
            w = 1.0 / s
            w0, wres = _quad_fit(t, w)
            wmin = float(np.min(np.abs(w)))
            if abs(w0) <= 0.1 * wmin and wres <= 0.05 * wmin:
                sign = 1.0 if s[-1] > 0 else -1.0
                return LimitResult("+inf" if sign > 0 else "-inf", sign * math.inf,
                                   "reciprocal extrapolates to 0")

    # finite limit from the extrapolating fit
    l0, res = _quad_fit(t, s)
    span = float(np.max(s) - np.min(s))
    if res <= 0.1 * eps * (1.0 + abs(l0)) and abs(l0 - s[-1]) <= 10 * span + eps * (1.0 + abs(l0)):
        return LimitResult("finite", l0, "extrapolated in 1/|log x|")

    # plain window rule
    w8 = s_all[-tol.raw_window:]
    med = float(np.median(w8))
    if np.max(np.abs(w8 - med)) <= eps * (1.0 + abs(med)):
        return LimitResult("finite", med, "window median")
    a8 = np.abs(w8)
    d = np.diff(a8)
    if np.all(a8 > 1.0 / eps) and (np.all(d > 0)) and (np.all(w8 > 0) or np.all(w8 < 0)):
        return LimitResult("+inf" if w8[-1] > 0 else "-inf", math.copysign(math.inf, w8[-1]),
                           "window exceeds 1/tol")
    return LimitResult("none", math.nan, "no decisive trend")


def _grid(x0: float, depth: int) -> np.ndarray:
    return x0 * 2.0 ** (-np.arange(depth + 1, dtype=float))


# ---------------------------------------------------------------------------
# regular variation

@dataclass(frozen=True)
class RVEstimate:
    index: float
    residual: float
    slope: float      # plain least-squares slope of log f on log x

    def __iter__(self):
        return iter((self.index, self.residual))


def rv_index(f: Callable[[float], float], x_hi: float, ratio: float = 0.5,
             n_points: int = 48) -> RVEstimate:
    """Regular-variation index of f at 0 from a geometric grid x_hi * ratio^j.

    The index is the extrapolation (in 1/|log x|) of the local log-log
    slopes; the residual is max |f(rx)/f(x) r^-index - 1| over the grid and is
    nonzero whenever a slowly varying factor is present.
    """
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie in (0, 1)")
    if n_points < 6:
        raise ValueError("need at least 6 grid points")
    xs = x_hi * ratio ** np.arange(n_points, dtype=float)
    vals = np.array([float(f(x)) for x in xs])
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
        raise NonPositiveValue("f must be positive and finite on the grid")
    lx, lf = np.log(xs), np.log(vals)
    slope = float(np.polyfit(lx, lf, 1)[0])
    local = np.diff(lf) / np.diff(lx)
    mid = np.sqrt(xs[:-1] * xs[1:])
    k = min(16, len(local))
    est, res = _quad_fit(1.0 / np.abs(np.log(mid[-k:])), local[-k:])
    if res > 0.05 * (1 + abs(est)) or abs(est - local[-1]) > 0.5:
        est = float(local[-1])
    ratios = vals[1:] / vals[:-1] * ratio ** (-est)
    return RVEstimate(float(est), float(np.max(np.abs(ratios - 1.0))), slope)


# ---------------------------------------------------------------------------
# attractors

@dataclass(frozen=True)
class Attractor:
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False, kw_only=True)

    variant = "attractor"

    @property
    def alpha(self) -> float:
        return math.nan

    @property
    def H(self) -> float:
        return 1.0 / self.alpha

    @property
    def is_limit(self) -> bool:
        return True

    def psi_hat(self, u: float) -> complex:
        raise NotImplementedError

    def params(self) -> dict:
        return {}

    def to_dict(self) -> dict:
        out = {"variant": self.variant, **self.params()}
        if self.is_limit:
            out["alpha"] = self.alpha
            out["H"] = self.H
        out["diagnostics"] = self.diagnostics
        return out


@dataclass(frozen=True)
class Brownian(Attractor):
    sigma_hat: float = 1.0
    variant = "Brownian"

    def __post_init__(self):
        if not self.sigma_hat > 0:
            raise ValueError("sigma_hat must be positive")

    @property
    def alpha(self):
        return 2.0

    def psi_hat(self, u):
        return complex(-0.5 * self.sigma_hat ** 2 * u * u)

    def params(self):
        return {"sigma_hat": self.sigma_hat}


@dataclass(frozen=True)
class LinearDrift(Attractor):
    gamma_hat: float = 1.0
    variant = "LinearDrift"

    def __post_init__(self):
        if self.gamma_hat == 0 or not math.isfinite(self.gamma_hat):
            raise ValueError("gamma_hat must be finite and nonzero")

    @property
    def alpha(self):
        return 1.0

    def psi_hat(self, u):
        return complex(0.0, self.gamma_hat * u)

    def params(self):
        return {"gamma_hat": self.gamma_hat}


def positivity(alpha: float, c_plus: float, c_minus: float, gamma_hat: float) -> float:
    """P(X_1 > 0) for the strictly alpha-stable process with these parameters."""
    if alpha == 1:
        return 0.5 + math.atan(gamma_hat / (math.pi * c_plus)) / math.pi
    beta = (c_plus - c_minus) / (c_plus + c_minus)
    return 0.5 + math.atan(beta * math.tan(math.pi * alpha / 2)) / (math.pi * alpha)


@dataclass(frozen=True)
class StrictlyStable(Attractor):
    alpha: float = 1.5
    c_plus_hat: float = 0.5
    c_minus_hat: float = 0.5
    gamma_hat: float = math.nan
    rho_hat: float = math.nan
    monotone: str = "none"
    variant = "StrictlyStable"

    def __post_init__(self):
        a, cp, cm = self.alpha, self.c_plus_hat, self.c_minus_hat
        if not 0 < a < 2:
            raise ValueError("alpha must lie in (0, 2)")
        if cp < 0 or cm < 0 or cp + cm == 0:
            raise ValueError("c_plus_hat, c_minus_hat must be >= 0, not both 0")
        if a == 1:
            if abs(cp - cm) > 1e-12 * (cp + cm):
                raise ValueError("strictly 1-stable needs c_plus_hat == c_minus_hat")
            if math.isnan(self.gamma_hat):
                object.__setattr__(self, "gamma_hat", 0.0)
        else:
            g = (cp - cm) / (1 - a)
            if math.isnan(self.gamma_hat):
                object.__setattr__(self, "gamma_hat", g)
            elif abs(self.gamma_hat - g) > 1e-9 * (1 + abs(g)):
                raise ValueError("gamma_hat must equal (c+ - c-)/(1 - alpha)")
        mono = "none"
        if a < 1 and cm == 0:
            mono = "increasing"
        elif a < 1 and cp == 0:
            mono = "decreasing"
        object.__setattr__(self, "monotone", mono)
        if math.isnan(self.rho_hat):
            if mono != "none":
                rho = 1.0 if mono == "increasing" else 0.0
            else:
                rho = positivity(a, cp, cm, self.gamma_hat)
            object.__setattr__(self, "rho_hat", rho)

    @property
    def jumps(self) -> StableTails:
        return StableTails(self.c_plus_hat, self.c_minus_hat, self.alpha)

    @property
    def model(self) -> LevyModel:
        return LevyModel(self.gamma_hat, 0.0, self.jumps)

    def psi_hat(self, u):
        return complex(0.0, self.gamma_hat * u) + self.jumps.psi(float(u))

    def params(self):
        return {"alpha": self.alpha, "c_plus_hat": self.c_plus_hat, "c_minus_hat": self.c_minus_hat,
                "gamma_hat": self.gamma_hat, "rho_hat": self.rho_hat, "monotone": self.monotone}


@dataclass(frozen=True)
class NoAttractor(Attractor):
    diagnostic: str = ""
    variant = "NoAttractor"

    @property
    def is_limit(self):
        return False

    def params(self):
        return {"diagnostic": self.diagnostic}


@dataclass(frozen=True)
class Undetermined(Attractor):
    diagnostic: str = ""
    variant = "Undetermined"

    @property
    def is_limit(self):
        return False

    def params(self):
        return {"diagnostic": self.diagnostic}


def attractor_from_dict(d: dict) -> Attractor:
    kind = d.get("variant")
    if kind == "Brownian":
        return Brownian(float(d.get("sigma_hat", 1.0)))
    if kind == "LinearDrift":
        return LinearDrift(float(d["gamma_hat"]))
    if kind == "StrictlyStable":
        return StrictlyStable(float(d["alpha"]), float(d["c_plus_hat"]), float(d["c_minus_hat"]),
                              float(d.get("gamma_hat", math.nan)))
    raise ValueError(f"not a limit attractor: {kind!r}")


# ---------------------------------------------------------------------------
# classification

def _grid_start(model: LevyModel) -> float:
    x0 = 0.5
    for c in model.components():
        if isinstance(c, PowerLogTail):
            x0 = min(x0, 0.5 * c.cutoff)
    return x0


@dataclass(frozen=True)
class StableConditions:
    alpha_limit: LimitResult
    tails_rv: bool
    balance: LimitResult          # Pi_plus / Pi_total
    centering: LimitResult        # m(x) / (x Pi_plus(x))
    scale: LimitResult            # x^alpha Pi_bar(x)

    @property
    def balance_limit(self) -> float:
        if not self.balance.finite:
            return math.nan
        r = self.balance.value
        return math.inf if r >= 1 else r / (1 - r)

    @property
    def centering_limit(self) -> float:
        return self.centering.value

    def to_dict(self) -> dict:
        return {"alpha": self.alpha_limit.to_dict(), "tails_rv": self.tails_rv,
                "balance_plus_fraction": self.balance.to_dict(),
                "balance_limit": _ext(self.balance_limit),
                "centering": self.centering.to_dict(), "scale": self.scale.to_dict()}


def _ext(v: float):
    if math.isnan(v):
        return None
    return str(v) if math.isinf(v) else v


def _tail_series(model: LevyModel, xs: np.ndarray):
    tp = np.empty(len(xs))
    tm = np.empty(len(xs))
    for i, x in enumerate(xs):
        tp[i], tm[i] = levy_tails(model, float(x))
    return tp, tm


def stable_conditions(model: LevyModel, alpha: float | None = None,
                      tol: Tolerance = Tolerance()) -> StableConditions:
    """Limits x -> 0 of the local tail index, the tail balance and the centering ratio."""
    xs = _grid(_grid_start(model), tol.depth)
    tp, tm = _tail_series(model, xs)
    tot = tp + tm
    if np.any(tot[-tol.tail:] <= 0):
        raise NonPositiveValue("tails vanish near 0")
    loc = np.log(tot[1:] / tot[:-1]) / math.log(2.0)
    alim = detect_limit(loc, np.sqrt(xs[1:] * xs[:-1]), tol)
    if alpha is None and alim.finite:
        alpha = alim.value
    tails_rv = alim.finite and alpha is not None and abs(alim.value - alpha) <= tol.snap
    balance = detect_limit(tp / tot, xs, tol)
    if alpha is not None and math.isfinite(alpha):
        scale = detect_limit(xs ** alpha * tot, xs, tol)
    else:
        scale = LimitResult("none", math.nan, "no index")
    with np.errstate(divide="ignore", invalid="ignore"):
        m = np.array([truncated_mean(model, float(x)) for x in xs])
        cent = m / (xs * tp)
    centering = detect_limit(cent, xs, tol) if np.all(tp[-tol.tail:] > 0) else \
        LimitResult("none", math.nan, "no positive jumps")
    return StableConditions(alim, bool(tails_rv), balance, centering, scale)


def _snap(a: float, tol: Tolerance) -> float:
    for target in (0.5, 1.0, 1.5):
        if abs(a - target) <= tol.snap:
            return target
    return round(a, 6)


def _sign_eventually(m: np.ndarray, scale: np.ndarray) -> int:
    tiny = 1e-12 * (1.0 + np.abs(scale))
    if np.all(m > tiny):
        return 1
    if np.all(m < -tiny):
        return -1
    return 0


def classify(model: LevyModel, target_normalization: float | None = None,
             tol: Tolerance = Tolerance()) -> Attractor:
    """Small-time attractor of ``model`` under the zooming-in scaling."""
    if target_normalization is not None and not target_normalization > 0:
        raise ValueError("target_normalization must be positive")
    norm = target_normalization
    if model.sigma2 > 0:
        return Brownian(norm or 1.0, diagnostics={"rule": "Gaussian component present"})
    gp = model.gamma_prime
    if gp is not None and gp != 0:
        return LinearDrift(math.copysign(norm or 1.0, gp),
                           diagnostics={"rule": "finite variation with nonzero natural drift",
                                        "gamma_prime": gp})
    rest, cpp = model.split_compound_poisson()
    diag: dict = {"stripped_compound_poisson": len(cpp)}
    if rest is None:
        return NoAttractor(diagnostic="compound Poisson process without drift has no small-time limit",
                           diagnostics=diag)
    if not any(not isinstance(c, CompoundPoisson) for c in rest.components()):
        # only a drift remains after stripping
        return LinearDrift(math.copysign(norm or 1.0, rest.gamma), diagnostics=diag)

    xs = _grid(_grid_start(rest), tol.depth)
    tp, tm = _tail_series(rest, xs)
    tot = tp + tm
    v = np.array([truncated_variance(rest, float(x)) for x in xs])
    m = np.array([truncated_mean(rest, float(x)) for x in xs])
    diag["protocol"] = PROTOCOL_NOTE

    # (i) x^2 Pi_bar / v -> 0
    r1 = detect_limit(xs ** 2 * tot / v, xs, tol)
    diag["brownian_ratio"] = r1.to_dict()
    if r1.is_zero(tol.limit):
        return Brownian(norm or 1.0, diagnostics=diag)

    # (ii) m of constant sign, x Pi_bar / m -> 0
    sgn = _sign_eventually(m[-tol.tail:], (xs * tot)[-tol.tail:])
    diag["mean_sign"] = sgn
    if sgn != 0:
        r2 = detect_limit(xs * tot / m, xs, tol)
        diag["drift_ratio"] = r2.to_dict()
        if r2.is_zero(tol.limit):
            return LinearDrift(sgn * (norm or 1.0), diagnostics=diag)

    # (iii) regularly varying tails with balance and centering
    if np.any(tot[-tol.tail:] <= 0):
        return NoAttractor(diagnostic="no small jumps and no drift limit", diagnostics=diag)
    sc = stable_conditions(rest, None, tol)
    diag["stable"] = sc.to_dict()
    if not sc.alpha_limit.finite:
        return Undetermined(diagnostic=f"tail index has no detectable limit; {PROTOCOL_NOTE}",
                            diagnostics=diag)
    alpha = _snap(sc.alpha_limit.value, tol)
    if alpha <= tol.snap:
        return NoAttractor(diagnostic="tails slowly varying at 0 (index 0)", diagnostics=diag)
    if alpha >= 2 - tol.snap:
        return Undetermined(diagnostic=f"tail index near 2 but variance test inconclusive; {PROTOCOL_NOTE}",
                            diagnostics=diag)
    if not sc.balance.finite:
        return Undetermined(diagnostic=f"tail balance has no detectable limit; {PROTOCOL_NOTE}",
                            diagnostics=diag)
    rho = min(1.0, max(0.0, sc.balance.value))
    if rho <= tol.limit:
        rho = 0.0
    elif rho >= 1 - tol.limit:
        rho = 1.0
    sc = stable_conditions(rest, alpha, tol)
    diag["stable"] = sc.to_dict()
    if norm is not None:
        c_sum = norm
    elif sc.scale.finite and sc.scale.value > tol.limit:
        c_sum = alpha * sc.scale.value
    else:
        c_sum = alpha
    diag["c_sum"] = c_sum
    if alpha != 1:
        return StrictlyStable(alpha, rho * c_sum, (1 - rho) * c_sum, diagnostics=diag)
    if abs(rho - 0.5) > tol.limit:
        return NoAttractor(diagnostic="index-1 tails are unbalanced and the drift test failed",
                           diagnostics=diag)
    cent = sc.centering
    if cent.finite:
        c = 0.5 * c_sum
        g = cent.value * c
        if abs(cent.value) <= tol.limit:
            g = 0.0
        return StrictlyStable(1.0, c, c, g, diagnostics=diag)
    if cent.kind in ("+inf", "-inf"):
        return Undetermined(diagnostic=f"centering diverges but the drift test failed; {PROTOCOL_NOTE}",
                            diagnostics=diag)
    return NoAttractor(diagnostic="centering ratio m(x)/(x Pi_plus(x)) has no limit",
                       diagnostics=diag) if cent.kind == "none" and "no decisive" not in cent.how else \
        Undetermined(diagnostic=f"centering ratio inconclusive; {PROTOCOL_NOTE}", diagnostics=diag)


# ---------------------------------------------------------------------------
# scaling function

_TABLE = np.exp(np.linspace(math.log(1e-14), 0.0, 8 * 14 + 1))


class ScalingFunction:
    """eps -> a_eps solving the attractor's defining equation as an equality.

    Brownian: a^2 / v(a) = eps / sigma_hat^2.  Drift: a / m(a) = eps / gamma_hat.
    Stable: Pi_bar(a) = (c_plus_hat + c_minus_hat) / (alpha eps).
    Compound Poisson components are removed first.
    """

    def __init__(self, model: LevyModel, attractor: Attractor):
        if not attractor.is_limit:
            raise ValueError(f"no scaling for {attractor.variant}")
        rest, _ = model.split_compound_poisson()
        if rest is None:
            raise ValueError("compound Poisson process has no scaling function")
        self.model = model
        self.rest = rest
        self.attractor = attractor
        self._g_table: np.ndarray | None = None
        self._memo: dict[float, float] = {}

    # g is increasing in a; the equation is g(a) = target(eps)
    def g(self, a: float) -> float:
        att, rest = self.attractor, self.rest
        if isinstance(att, Brownian):
            return a * a / truncated_variance(rest, a) if a < 1 else a * a / truncated_variance(rest, 1 - 1e-16)
        if isinstance(att, LinearDrift):
            m = truncated_mean(rest, min(a, 1 - 1e-16))
            if m == 0 or math.copysign(1, m) != math.copysign(1, att.gamma_hat):
                return math.inf if a > 1e-3 else math.nan
            return a / abs(m)
        tp, tm = levy_tails(rest, a)
        tot = tp + tm
        return math.inf if tot <= 0 else 1.0 / tot

    def target(self, eps: float) -> float:
        att = self.attractor
        if isinstance(att, Brownian):
            return eps / att.sigma_hat ** 2
        if isinstance(att, LinearDrift):
            return eps / abs(att.gamma_hat)
        return eps * att.alpha / (att.c_plus_hat + att.c_minus_hat)

    def _table(self) -> np.ndarray:
        if self._g_table is None:
            self._g_table = np.array([self.g(float(a)) for a in _TABLE])
        return self._g_table

    def __call__(self, eps: float) -> float:
        eps = float(eps)
        if not 0 < eps <= 1:
            raise ValueError("eps must lie in (0, 1]")
        if eps in self._memo:
            return self._memo[eps]
        tgt = self.target(eps)
        h = np.log(self._table()) - math.log(tgt)
        ok = ~np.isnan(h)
        idx = np.flatnonzero(ok & (h >= 0))
        if len(idx) == 0 or idx[0] == 0 or not ok[idx[0] - 1] or h[idx[0] - 1] >= 0:
            raise BracketingFailure(f"no root of the scaling equation in [1e-14, 1] for eps={eps:g}")
        lo, hi = math.log(_TABLE[idx[0] - 1]), math.log(_TABLE[idx[0]])
        while hi - lo > 1e-13:
            mid = 0.5 * (lo + hi)
            val = self.g(math.exp(mid))
            if math.isnan(val):
                raise BracketingFailure("scaling equation undefined inside the bracket")
            if val >= tgt:
                hi = mid
            else:
                lo = mid
        a = math.exp(0.5 * (lo + hi))
        if self.residual(eps, a) > 1e-9:
            raise BracketingFailure(f"scaling equation has a jump at a={a:g}; no exact root")
        self._memo[eps] = a
        return a

    def residual(self, eps: float, a: float | None = None) -> float:
        a = self(eps) if a is None else a
        return abs(self.g(a) / self.target(eps) - 1.0)


def solve_scaling(model: LevyModel, attractor: Attractor, eps: float) -> float:
    return ScalingFunction(model, attractor)(eps)


# ---------------------------------------------------------------------------
# random walks with a constant limit

@dataclass(frozen=True)
class RWSpec:
    """Step law of a random walk through P(|zeta| > x) and E(zeta; |zeta| <= x)."""

    tail: Callable[[float], float]
    trunc_mean: Callable[[float], float]
    name: str = "custom"

    @classmethod
    def from_law(cls, law: JumpLaw, name: str = "law") -> "RWSpec":
        tail = lambda x: law.prob_above(x) + law.prob_below(x)
        mean = lambda x: law.partial(1, 0.0, math.nextafter(x, math.inf))
        return cls(tail, mean, name)

    @classmethod
    def pareto(cls, shape: float, scale: float = 1.0) -> "RWSpec":
        if shape <= 0 or scale <= 0:
            raise ModelError("pareto needs positive shape and scale")

        def tail(x):
            return 1.0 if x < scale else (scale / x) ** shape

        def mean(x):
            if x <= scale:
                return 0.0
            if shape == 1:
                return scale * math.log(x / scale)
            return shape * scale ** shape * (x ** (1 - shape) - scale ** (1 - shape)) / (1 - shape)

        return cls(tail, mean, f"pareto({shape:g},{scale:g})")

    @classmethod
    def cauchy(cls, scale: float = 1.0) -> "RWSpec":
        return cls(lambda x: 1.0 - 2.0 / math.pi * math.atan(x / scale), lambda x: 0.0,
                   f"cauchy({scale:g})")

    @classmethod
    def from_dict(cls, d: dict) -> "RWSpec":
        kind = d.get("kind")
        try:
            if kind == "pareto":
                return cls.pareto(float(d["shape"]), float(d.get("scale", 1.0)))
            if kind == "cauchy":
                return cls.cauchy(float(d.get("scale", 1.0)))
            if kind == "normal":
                return cls.from_law(NormalLaw(float(d.get("mean", 0.0)), float(d.get("std", 1.0))), "normal")
            if kind in ("discrete", "two_point"):
                return cls.from_law(DiscreteLaw(tuple(map(float, d["values"])),
                                                tuple(map(float, d["probs"]))), kind)
        except KeyError as exc:
            raise ModelError(f"random-walk spec missing field {exc}") from None
        raise ModelError(f"unknown random-walk kind {kind!r}")


@dataclass(frozen=True)
class RWResult:
    attracted: bool
    solver: Callable[[float], float] | None
    diagnostics: dict


def rw_constant_attraction(spec: RWSpec, gamma_hat: float = 1.0,
                           tol: Tolerance = Tolerance(), x0: float = 2.0) -> RWResult:
    """Whether S_n / a_n -> gamma_hat for some a_n, and a solver n -> a_n."""
    if gamma_hat == 0:
        raise ValueError("gamma_hat must be nonzero")
    xs = x0 * 2.0 ** np.arange(tol.depth + 1, dtype=float)
    tail = np.array([spec.tail(float(x)) for x in xs])
    m = np.array([spec.trunc_mean(float(x)) for x in xs])
    if np.any(np.diff(tail) > 1e-15) or tail[-1] > tail[0]:
        raise ModelError("tail function must be nonincreasing")
    diag: dict = {"protocol": PROTOCOL_NOTE}
    sgn = _sign_eventually(m[-tol.tail:] / gamma_hat, (xs * tail)[-tol.tail:])
    diag["mean_sign"] = sgn
    if sgn <= 0:
        return RWResult(False, None, diag)
    r = detect_limit(xs * tail / m, 1.0 / xs, tol)
    diag["ratio"] = r.to_dict()
    if r.kind == "none":
        raise UndeterminedError(f"x P(|zeta|>x) / m(x) inconclusive; {PROTOCOL_NOTE}")
    if not r.is_zero(tol.limit):
        return RWResult(False, None, diag)

    def solve(n: float) -> float:
        # a / m(a) = n / gamma_hat, increasing in a on the positive-mean range
        tgt = n / abs(gamma_hat)
        lo, hi = math.log(x0), math.log(x0) + 1.0
        f = lambda la: math.exp(la) / abs(spec.trunc_mean(math.exp(la))) - tgt
        if f(lo) >= 0:
            raise BracketingFailure("n below the solver range")
        while f(hi) < 0:
            hi += 2 * (hi - lo)
            if hi > 700:
                raise BracketingFailure("no root below 1e300")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if f(mid) >= 0:
                hi = mid
            else:
                lo = mid
            if hi - lo < 1e-13:
                break
        return math.exp(0.5 * (lo + hi))

    return RWResult(True, solve, diag)
