"""Lévy triplets (gamma, sigma^2, Pi) and their small-scale descriptors.

The drift ``gamma`` is always relative to the truncation ``|x| < 1``.  Every
jump measure knows its two tails, the truncated moments entering the
domain-of-attraction conditions, its Blumenthal-Getoor index and its
contribution to the characteristic exponent ``psi(iu)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import mpmath
import numpy as np
from scipy import integrate, special

EULER_GAMMA = float(np.euler_gamma)

# quadrature tolerances for log-spaced panels
QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-8


class ModelError(ValueError):
    """Invalid model specification."""


class QuadratureError(RuntimeError):
    """Numeric integration did not converge."""


class NoExactSampler(NotImplementedError):
    """The jump measure has no exact increment sampler."""


def _cosm1(z):
    return -2.0 * math.sin(0.5 * z) ** 2


def _sinmz(z):
    # sin(z) - z without cancellation
    if abs(z) < 1e-2:
        z2 = z * z
        return -z * z2 / 6 * (1 - z2 / 20 * (1 - z2 / 42))
    return math.sin(z) - z


def _normal_pdf(z):
    return np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)


def _normal_cdf(z):
    return special.ndtr(z)


# ---------------------------------------------------------------------------
# jump laws of compound Poisson components

class JumpLaw:
    """Distribution of a single jump of a compound Poisson process."""

    def prob_above(self, x: float) -> float:  # P(Y > x)
        raise NotImplementedError

    def prob_below(self, x: float) -> float:  # P(Y < -x)
        raise NotImplementedError

    def partial(self, k: int, lo: float, hi: float) -> float:
        """E[Y^k; lo <= |Y| < hi] for k in {0, 1, 2}."""
        raise NotImplementedError

    def cf(self, u: float) -> complex:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class NormalLaw(JumpLaw):
    mean: float = 0.0
    std: float = 1.0

    def __post_init__(self):
        if not self.std > 0:
            raise ModelError("normal jump law needs std > 0")

    def prob_above(self, x):
        return float(_normal_cdf((self.mean - x) / self.std))

    def prob_below(self, x):
        return float(_normal_cdf((-x - self.mean) / self.std))

    def _interval(self, k, a, b):
        # E[Y^k; a < Y < b]
        za, zb = (a - self.mean) / self.std, (b - self.mean) / self.std
        p = _normal_cdf(zb) - _normal_cdf(za)
        fa, fb = _normal_pdf(za), _normal_pdf(zb)
        ez = fa - fb
        if k == 0:
            return p
        if k == 1:
            return self.mean * p + self.std * ez
        aza = za * fa if np.isfinite(za) else 0.0
        bzb = zb * fb if np.isfinite(zb) else 0.0
        ez2 = p + aza - bzb
        return self.mean ** 2 * p + 2 * self.mean * self.std * ez + self.std ** 2 * ez2

    def partial(self, k, lo, hi):
        if hi <= lo:
            return 0.0
        return float(self._interval(k, lo, hi) + self._interval(k, -hi, -lo))

    def cf(self, u):
        return complex(np.exp(1j * u * self.mean - 0.5 * (self.std * u) ** 2))

    def sample(self, rng, size):
        return rng.normal(self.mean, self.std, size)

    def to_dict(self):
        return {"kind": "normal", "mean": self.mean, "std": self.std}


@dataclass(frozen=True)
class DiscreteLaw(JumpLaw):
    values: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        v = tuple(float(a) for a in self.values)
        p = tuple(float(a) for a in self.probs)
        if len(v) == 0 or len(v) != len(p):
            raise ModelError("discrete law needs matching non-empty values/probs")
        if min(p) < 0 or not math.isclose(sum(p), 1.0, rel_tol=1e-12):
            raise ModelError("discrete law probabilities must be >= 0 and sum to 1")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probs", p)

    def prob_above(self, x):
        return sum(p for v, p in zip(self.values, self.probs) if v > x)

    def prob_below(self, x):
        return sum(p for v, p in zip(self.values, self.probs) if v < -x)

    def partial(self, k, lo, hi):
        return sum(p * v ** k for v, p in zip(self.values, self.probs) if lo <= abs(v) < hi)

    def cf(self, u):
        return complex(sum(p * np.exp(1j * u * v) for v, p in zip(self.values, self.probs)))

    def sample(self, rng, size):
        return rng.choice(np.asarray(self.values), size=size, p=np.asarray(self.probs))

    def to_dict(self):
        if len(self.values) == 1:
            return {"kind": "dirac", "at": self.values[0]}
        return {"kind": "discrete", "values": list(self.values), "probs": list(self.probs)}


def DiracLaw(at: float) -> DiscreteLaw:
    return DiscreteLaw((float(at),), (1.0,))


@dataclass(frozen=True)
class UniformLaw(JumpLaw):
    low: float
    high: float

    def __post_init__(self):
        if not self.high > self.low:
            raise ModelError("uniform jump law needs high > low")

    def _interval(self, k, a, b):
        a, b = max(a, self.low), min(b, self.high)
        if b <= a:
            return 0.0
        return (b ** (k + 1) - a ** (k + 1)) / ((k + 1) * (self.high - self.low))

    def prob_above(self, x):
        return self._interval(0, x, math.inf)

    def prob_below(self, x):
        return self._interval(0, -math.inf, -x)

    def partial(self, k, lo, hi):
        if hi <= lo:
            return 0.0
        return self._interval(k, lo, hi) + self._interval(k, -hi, -lo)

    def cf(self, u):
        if u == 0:
            return 1.0 + 0j
        return complex((np.exp(1j * u * self.high) - np.exp(1j * u * self.low)) / (1j * u * (self.high - self.low)))

    def sample(self, rng, size):
        return rng.uniform(self.low, self.high, size)

    def to_dict(self):
        return {"kind": "uniform", "low": self.low, "high": self.high}


def jump_law_from_dict(d: dict) -> JumpLaw:
    d = dict(d)
    kind = d.pop("kind", None)
    fields = {"normal": {"mean", "std"}, "dirac": {"at"}, "atom": {"at"},
              "discrete": {"values", "probs"}, "uniform": {"low", "high"}}
    if kind not in fields:
        raise ModelError(f"unknown jump law kind {kind!r}")
    if set(d) - fields[kind]:
        raise ModelError(f"unknown fields in jump law: {sorted(set(d) - fields[kind])}")
    try:
        if kind == "normal":
            return NormalLaw(float(d.get("mean", 0.0)), float(d.get("std", 1.0)))
        if kind in ("dirac", "atom"):
            return DiracLaw(float(d["at"]))
        if kind == "discrete":
            return DiscreteLaw(tuple(d["values"]), tuple(d["probs"]))
        return UniformLaw(float(d["low"]), float(d["high"]))
    except KeyError as exc:
        raise ModelError(f"jump law {kind!r} is missing field {exc}") from None


# ---------------------------------------------------------------------------
# power-log integrals: I(k) = int y^(k-1-alpha) (-log y)^(-p) dy

def _exp_power_integral(lam: float, p: float, a: float, b: float) -> float:
    """int_a^b exp(-lam*s) s^(-p) ds for 0 < a < b <= inf."""
    if b <= a:
        return 0.0
    if lam == 0.0:
        if p == 1.0:
            return math.inf if math.isinf(b) else math.log(b / a)
        if math.isinf(b):
            return a ** (1 - p) / (p - 1) if p > 1 else math.inf
        return (b ** (1 - p) - a ** (1 - p)) / (1 - p)
    if math.isinf(b):
        if lam < 0:
            return math.inf
        val = mpmath.gammainc(1 - p, lam * a) * mpmath.power(lam, p - 1)
        return float(val)
    if p == 0.0:
        return (math.exp(-lam * a) - math.exp(-lam * b)) / lam
    # substitute s = a + w, scale by exp(-lam*a) to keep the integrand O(1)
    width = b - a
    f = lambda w: math.exp(-lam * w) * (a + w) ** (-p)
    n_panels = max(1, int(math.ceil(width * max(abs(lam), 1.0))))
    edges = np.linspace(0.0, width, min(n_panels, 64) + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)
        total += val
    return math.exp(-lam * a) * total


def power_log_integral(k: int, alpha: float, p: float, lo: float, hi: float) -> float:
    """int_lo^hi y^(k-1-alpha) |log y|^(-p) dy for 0 <= lo < hi < 1."""
    if hi <= lo:
        return 0.0
    lam = k - alpha
    s_lo = -math.log(hi)
    s_hi = math.inf if lo == 0.0 else -math.log(lo)
    return _exp_power_integral(lam, p, s_lo, s_hi)


# ---------------------------------------------------------------------------
# jump measures

class JumpMeasure:
    """Lévy measure Pi.  Subclasses are immutable."""

    def tails(self, x: float) -> tuple[float, float]:
        raise NotImplementedError

    def int_y_above(self, x: float) -> float:
        """int_{x <= |y| < 1} y Pi(dy)."""
        raise NotImplementedError

    def int_y2_below(self, x: float) -> float:
        """int_{|y| < x} y^2 Pi(dy)."""
        raise NotImplementedError

    def int_y_below(self, x: float) -> float:
        """int_{|y| < x} y Pi(dy); only defined for finite small-jump first moment."""
        raise NotImplementedError

    @property
    def finite_variation(self) -> bool:
        """Whether int_{|y|<1} |y| Pi(dy) < inf."""
        raise NotImplementedError

    @property
    def total_mass(self) -> float:
        raise NotImplementedError

    def bg_index(self) -> float:
        raise NotImplementedError

    def psi(self, u: float) -> complex:
        """int (e^{iuy} - 1 - iuy 1{|y|<1}) Pi(dy)."""
        raise NotImplementedError

    def components(self) -> tuple["JumpMeasure", ...]:
        return (self,)

    # sampling: the component is simulated as a process with triplet
    # (intrinsic_gamma, 0, Pi)
    @property
    def intrinsic_gamma(self) -> float:
        raise NoExactSampler(f"{type(self).__name__} has no exact sampler")

    def sample(self, dt: float, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NoExactSampler(f"{type(self).__name__} has no exact sampler")

    def to_dict(self) -> dict:
        raise NotImplementedError

    def small_mean(self) -> float:
        """int_{|y|<1} y Pi(dy) (finite variation only)."""
        return self.int_y_below(1.0)


@dataclass(frozen=True)
class Empty(JumpMeasure):
    def tails(self, x):
        return 0.0, 0.0

    def int_y_above(self, x):
        return 0.0

    def int_y2_below(self, x):
        return 0.0

    def int_y_below(self, x):
        return 0.0

    finite_variation = True
    total_mass = 0.0

    def bg_index(self):
        return 0.0

    def psi(self, u):
        return 0j

    def components(self):
        return ()

    intrinsic_gamma = 0.0

    def sample(self, dt, rng, size):
        return np.zeros(size)

    def to_dict(self):
        return {"kind": "empty"}


def _stable_scale(alpha: float, c_sum: float) -> float:
    """Scale of the S1 stable law matching Levy density c_sum/2-symmetrised tails."""
    if alpha == 1.0:
        return c_sum * math.pi / 2
    return (-special.gamma(-alpha) * math.cos(math.pi * alpha / 2) * c_sum) ** (1 / alpha)


def cms_standard(alpha: float, beta: float, rng: np.random.Generator, size) -> np.ndarray:
    """Chambers-Mallows-Stuck draws of S1(alpha, beta, scale=1, loc=0)."""
    V = rng.uniform(-math.pi / 2, math.pi / 2, size)
    W = rng.standard_exponential(size)
    if alpha == 1.0:
        hb = math.pi / 2 + beta * V
        return (2 / math.pi) * (hb * np.tan(V) - beta * np.log((math.pi / 2) * W * np.cos(V) / hb))
    t = beta * math.tan(math.pi * alpha / 2)
    B = math.atan(t) / alpha
    S = (1 + t * t) ** (1 / (2 * alpha))
    aVB = alpha * (V + B)
    return S * np.sin(aVB) / np.cos(V) ** (1 / alpha) * (np.cos(V - aVB) / W) ** ((1 - alpha) / alpha)


@dataclass(frozen=True)
class StableTails(JumpMeasure):
    """Density c_plus x^(-1-alpha) on (0, inf) and c_minus |x|^(-1-alpha) on (-inf, 0)."""

    c_plus: float
    c_minus: float
    alpha: float

    def __post_init__(self):
        if not (0 < self.alpha < 2):
            raise ModelError("stable alpha must lie in (0, 2)")
        if self.c_plus < 0 or self.c_minus < 0 or self.c_plus + self.c_minus <= 0:
            raise ModelError("stable tails need c_plus, c_minus >= 0 with positive sum")

    def tails(self, x):
        f = x ** (-self.alpha) / self.alpha
        return self.c_plus * f, self.c_minus * f

    def _abs_first(self, x):
        # int_x^1 y * y^(-1-alpha) dy
        if self.alpha == 1.0:
            return -math.log(x)
        return (x ** (1 - self.alpha) - 1) / (self.alpha - 1)

    def int_y_above(self, x):
        if x >= 1:
            return 0.0
        return (self.c_plus - self.c_minus) * self._abs_first(x)

    def int_y2_below(self, x):
        return (self.c_plus + self.c_minus) * x ** (2 - self.alpha) / (2 - self.alpha)

    def int_y_below(self, x):
        if not self.finite_variation:
            raise ModelError("first moment of small jumps is infinite")
        return (self.c_plus - self.c_minus) * x ** (1 - self.alpha) / (1 - self.alpha)

    @property
    def finite_variation(self):
        return self.alpha < 1

    total_mass = math.inf

    def bg_index(self):
        return self.alpha

    def psi(self, u):
        if u == 0:
            return 0j
        cp, cm, a = self.c_plus, self.c_minus, self.alpha
        au = abs(u)
        if a == 1.0:
            lg = math.log(au)
            pos = complex(-math.pi / 2 * au, u * (1 - EULER_GAMMA - lg))
            neg = complex(-math.pi / 2 * au, -u * (1 - EULER_GAMMA - lg))
            return cp * pos + cm * neg
        g = special.gamma(-a)
        rot = np.exp(-1j * math.pi * a / 2 * np.sign(u))
        pos = g * au ** a * rot + 1j * u / (a - 1)
        neg = g * au ** a * np.conj(rot) - 1j * u / (a - 1)
        return complex(cp * pos + cm * neg)

    @property
    def beta(self) -> float:
        return (self.c_plus - self.c_minus) / (self.c_plus + self.c_minus)

    @property
    def intrinsic_gamma(self):
        # alpha != 1: the strictly stable drift; alpha == 1: sampled with gamma = 0
        if self.alpha == 1.0:
            return 0.0
        return (self.c_plus - self.c_minus) / (1 - self.alpha)

    def sample(self, dt, rng, size):
        a, beta = self.alpha, self.beta
        c_sum = self.c_plus + self.c_minus
        z = cms_standard(a, beta, rng, size)
        if a != 1.0:
            return dt ** (1 / a) * _stable_scale(a, c_sum) * z
        # psi*dt = -s|u|(1 + i beta (2/pi) sgn(u) log|u|) + i dt mu u
        s = dt * c_sum * math.pi / 2
        mu = (self.c_plus - self.c_minus) * (1 - EULER_GAMMA)
        return s * z + (2 / math.pi) * beta * s * math.log(s) + dt * mu

    def to_dict(self):
        return {"kind": "stable", "c_plus": self.c_plus, "c_minus": self.c_minus, "alpha": self.alpha}


_SIDES = {"+": (1, 0), "-": (0, 1), "both": (1, 1)}


@dataclass(frozen=True)
class PowerLogTail(JumpMeasure):
    """Power-log behaviour near zero, zero mass beyond ``cutoff``.

    ``form="tail"``: Pi_bar(x) = scale * x^(-alpha_p) |log x|^(-log_power) for
    x < cutoff (the mass of the tail at the cutoff sits as an atom there).
    ``form="density"``: Pi(dy) = scale * y^(-1-alpha_p) |log y|^(-log_power) dy
    on (0, cutoff).
    """

    side: str
    alpha_p: float
    log_power: float
    cutoff: float = 0.25
    scale: float = 1.0
    form: str = "tail"

    def __post_init__(self):
        if self.side not in _SIDES:
            raise ModelError("side must be '+', '-' or 'both'")
        if self.form not in ("tail", "density"):
            raise ModelError("form must be 'tail' or 'density'")
        if not self.alpha_p > 0 or not self.scale > 0:
            raise ModelError("alpha_p and scale must be positive")
        if not (0 < self.cutoff <= 1):
            raise ModelError("cutoff must lie in (0, 1]")
        if self.cutoff == 1 and self.log_power > 0:
            raise ModelError("cutoff 1 requires log_power <= 0")
        a, p = self.alpha_p, self.log_power
        if self.form == "tail" and p > 0 and self.cutoff > math.exp(-p / a) * (1 + 1e-12):
            raise ModelError(f"tail is not monotone up to cutoff; need cutoff <= exp(-p/alpha) = {math.exp(-p / a):.6g}")
        if a > 2 or (a == 2 and p <= 1):
            raise ModelError("measure violates int (x^2 ^ 1) Pi(dx) < inf")

    @property
    def _weights(self):
        return _SIDES[self.side]

    def _T(self, x):
        if x >= self.cutoff:
            return 0.0
        return self.scale * x ** (-self.alpha_p) * (-math.log(x)) ** (-self.log_power)

    def _I(self, k, lo, hi):
        return self.scale * power_log_integral(k, self.alpha_p, self.log_power, lo, min(hi, self.cutoff))

    @property
    def _atom(self) -> float:
        # tail form: mass of the atom at the cutoff
        if self.form != "tail":
            return 0.0
        x0 = self.cutoff
        if x0 == 1:
            return self.scale if self.log_power == 0 else 0.0
        return self.scale * x0 ** (-self.alpha_p) * (-math.log(x0)) ** (-self.log_power)

    def _one_tail(self, x):
        if self.form == "tail":
            return self._T(x)
        return self._I(0, x, self.cutoff)

    def tails(self, x):
        t = self._one_tail(x)
        wp, wm = self._weights
        return wp * t, wm * t

    def _one_above(self, x):
        # int_{[x, 1)} y Pi_side(dy)
        x0 = self.cutoff
        if self.form == "density":
            return self._I(1, x, x0) if x < x0 else 0.0
        atom_in = x0 < 1
        if x > x0 or (x == x0 and not atom_in):
            return 0.0
        if x == x0:
            return x0 * self._atom
        val = x * self._T(x) + self._I(1, x, x0)
        if not atom_in:
            val -= x0 * self._atom
        return val

    def _one_y2_below(self, x):
        x0 = self.cutoff
        if self.form == "density":
            return self._I(2, 0.0, x)
        if x <= x0:
            return -x * x * self._T(x) + 2 * self._I(2, 0.0, x)
        return 2 * self._I(2, 0.0, x0)

    def _one_y_below(self, x):
        if not self.finite_variation:
            raise ModelError("first moment of small jumps is infinite")
        x0 = self.cutoff
        if self.form == "density":
            return self._I(1, 0.0, x)
        if x <= x0:
            return -x * self._T(x) + self._I(1, 0.0, x)
        return self._I(1, 0.0, x0)

    def _signed(self, val):
        wp, wm = self._weights
        return (wp - wm) * val

    def int_y_above(self, x):
        if self.side == "both":
            return 0.0
        return self._signed(self._one_above(x))

    def int_y2_below(self, x):
        wp, wm = self._weights
        return (wp + wm) * self._one_y2_below(x)

    def int_y_below(self, x):
        if self.side == "both":
            if not self.finite_variation:
                raise ModelError("first moment of small jumps is infinite")
            return 0.0
        return self._signed(self._one_y_below(x))

    @property
    def finite_variation(self):
        a, p = self.alpha_p, self.log_power
        return a < 1 or (a == 1 and p > 1)

    total_mass = math.inf

    def bg_index(self):
        return min(self.alpha_p, 2.0)

    def _one_psi(self, u):
        # int (e^{iuy} - 1 - iuy 1{y<1}) Pi_side(dy); the tail form is integrated by parts
        # regions: (0, y_s) series, [y_s, y_o] log panels, [y_o, x0] oscillatory weights
        x0 = self.cutoff
        au = abs(u)
        y_s = min(x0, 1e-7 / au)
        y_o = min(x0, 8.0 / au)
        c, a, p = self.scale, self.alpha_p, self.log_power
        if self.form == "tail":
            T = self._T
            re_f = lambda s: -u * math.sin(u * math.exp(-s)) * T(math.exp(-s)) * math.exp(-s)
            im_f = lambda s: u * _cosm1(u * math.exp(-s)) * T(math.exp(-s)) * math.exp(-s)
            total = complex(-u * u * self._I(2, 0.0, y_s), 0.0)
            if x0 == 1 and self._atom:
                # atom at 1 sits outside the compensated region
                total += 1j * u * self._atom
            weight_f = T
        else:
            dens = lambda y: c * y ** (-1 - a) * (-math.log(y)) ** (-p)
            re_f = lambda s: _cosm1(u * math.exp(-s)) * dens(math.exp(-s)) * math.exp(-s)
            im_f = lambda s: _sinmz(u * math.exp(-s)) * dens(math.exp(-s)) * math.exp(-s)
            total = complex(-0.5 * u * u * self._I(2, 0.0, y_s), 0.0)
            weight_f = dens
        s_lo, s_hi = -math.log(y_o), -math.log(y_s)
        if s_hi > s_lo:
            edges = np.append(np.arange(s_lo, s_hi, 0.5), s_hi)
            for a_, b_ in zip(edges[:-1], edges[1:]):
                if b_ - a_ < 1e-14:
                    continue
                re, _ = integrate.quad(re_f, a_, b_, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)
                im, _ = integrate.quad(im_f, a_, b_, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)
                if not (np.isfinite(re) and np.isfinite(im)):
                    raise QuadratureError("characteristic exponent quadrature failed")
                total += complex(re, im)
        if x0 > y_o:
            edges = [y_o]
            while edges[-1] * 2 < x0:
                edges.append(edges[-1] * 2)
            edges.append(x0)
            cos_part = sin_part = 0.0
            for a_, b_ in zip(edges[:-1], edges[1:]):
                cv, _ = integrate.quad(weight_f, a_, b_, weight="cos", wvar=u, epsabs=QUAD_EPSABS, limit=200)
                sv, _ = integrate.quad(weight_f, a_, b_, weight="sin", wvar=u, epsabs=QUAD_EPSABS, limit=200)
                cos_part += cv
                sin_part += sv
            if self.form == "tail":
                plain = self._I(1, y_o, x0)
                total += complex(-u * sin_part, u * (cos_part - plain))
            else:
                total += complex(cos_part - self._I(0, y_o, x0), sin_part - u * self._I(1, y_o, x0))
        return total

    def psi(self, u):
        if u == 0:
            return 0j
        wp, wm = self._weights
        val = 0j
        if wp:
            val += self._one_psi(u)
        if wm:
            # mirror image of the positive side
            val += self._one_psi(-u)
        return complex(val)

    def to_dict(self):
        return {"kind": "powerlog", "side": self.side, "alpha_p": self.alpha_p,
                "log_power": self.log_power, "cutoff": self.cutoff, "scale": self.scale,
                "form": self.form}


@dataclass(frozen=True)
class CompoundPoisson(JumpMeasure):
    rate: float
    law: JumpLaw

    def __post_init__(self):
        if not self.rate > 0:
            raise ModelError("compound Poisson rate must be positive")

    def tails(self, x):
        return self.rate * self.law.prob_above(x), self.rate * self.law.prob_below(x)

    def int_y_above(self, x):
        return self.rate * self.law.partial(1, x, 1.0)

    def int_y2_below(self, x):
        return self.rate * self.law.partial(2, 0.0, x)

    def int_y_below(self, x):
        return self.rate * self.law.partial(1, 0.0, x)

    finite_variation = True

    @property
    def total_mass(self):
        return self.rate

    def bg_index(self):
        return 0.0

    def psi(self, u):
        return complex(self.rate * (self.law.cf(u) - 1) - 1j * u * self.small_mean())

    @property
    def intrinsic_gamma(self):
        return self.small_mean()

    def sample(self, dt, rng, size):
        counts = rng.poisson(self.rate * dt, size)
        out = np.zeros(size)
        total = int(counts.sum())
        if total:
            jumps = self.law.sample(rng, total)
            out = np.bincount(np.repeat(np.arange(size), counts), weights=jumps, minlength=size)
        return out

    def to_dict(self):
        return {"kind": "cpp", "rate": self.rate, "law": self.law.to_dict()}


def ShiftedAtom(location: float, mass: float) -> CompoundPoisson:
    """Point mass ``mass`` at ``location`` (a compound Poisson component)."""
    if location == 0:
        raise ModelError("atom location must be non-zero")
    if not mass > 0:
        raise ModelError("atom mass must be positive")
    return CompoundPoisson(float(mass), DiracLaw(location))


@dataclass(frozen=True)
class Sum(JumpMeasure):
    parts: tuple[JumpMeasure, ...] = ()

    def __post_init__(self):
        flat: list[JumpMeasure] = []
        for p in self.parts:
            flat.extend(p.components())
        object.__setattr__(self, "parts", tuple(flat))

    def components(self):
        return self.parts

    def tails(self, x):
        tp = tm = 0.0
        for p in self.parts:
            a, b = p.tails(x)
            tp += a
            tm += b
        return tp, tm

    def int_y_above(self, x):
        return sum(p.int_y_above(x) for p in self.parts)

    def int_y2_below(self, x):
        return sum(p.int_y2_below(x) for p in self.parts)

    def int_y_below(self, x):
        return sum(p.int_y_below(x) for p in self.parts)

    @property
    def finite_variation(self):
        return all(p.finite_variation for p in self.parts)

    @property
    def total_mass(self):
        return sum(p.total_mass for p in self.parts)

    def bg_index(self):
        return max((p.bg_index() for p in self.parts), default=0.0)

    def psi(self, u):
        return sum((p.psi(u) for p in self.parts), 0j)

    @property
    def intrinsic_gamma(self):
        return sum(p.intrinsic_gamma for p in self.parts)

    def sample(self, dt, rng, size):
        out = np.zeros(size)
        for p in self.parts:
            out += p.sample(dt, rng, size)
        return out

    def to_dict(self):
        raise TypeError("Sum serialises as a list of components")


def make_jumps(parts: Iterable[JumpMeasure]) -> JumpMeasure:
    flat = [c for p in parts for c in p.components()]
    if not flat:
        return Empty()
    if len(flat) == 1:
        return flat[0]
    return Sum(tuple(flat))


def jump_measure_from_dict(d: dict) -> JumpMeasure:
    d = dict(d)
    kind = d.pop("kind", None)
    allowed = {
        "stable": {"c_plus", "c_minus", "alpha"},
        "powerlog": {"side", "alpha_p", "log_power", "cutoff", "scale", "form"},
        "cpp": {"rate", "law"},
        "atom": {"location", "mass"},
        "empty": set(),
    }
    if kind not in allowed:
        raise ModelError(f"unknown jump kind {kind!r}")
    extra = set(d) - allowed[kind]
    if extra:
        raise ModelError(f"unknown fields for {kind!r}: {sorted(extra)}")
    try:
        if kind == "stable":
            return StableTails(float(d["c_plus"]), float(d["c_minus"]), float(d["alpha"]))
        if kind == "powerlog":
            return PowerLogTail(str(d["side"]), float(d["alpha_p"]), float(d["log_power"]),
                                float(d.get("cutoff", 0.25)), float(d.get("scale", 1.0)),
                                str(d.get("form", "tail")))
        if kind == "cpp":
            return CompoundPoisson(float(d["rate"]), jump_law_from_dict(d["law"]))
        if kind == "atom":
            return ShiftedAtom(float(d["location"]), float(d["mass"]))
    except KeyError as exc:
        raise ModelError(f"jump {kind!r} is missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(f"bad value in jump {kind!r}: {exc}") from None
    return Empty()


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LevyModel:
    """Lévy triplet with drift ``gamma`` relative to the truncation |x| < 1."""

    gamma: float = 0.0
    sigma2: float = 0.0
    jumps: JumpMeasure = field(default_factory=Empty)
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if not np.isfinite(self.gamma) or not np.isfinite(self.sigma2):
            raise ModelError("gamma and sigma2 must be finite")
        if self.sigma2 < 0:
            raise ModelError("sigma2 must be nonnegative")
        object.__setattr__(self, "jumps", make_jumps(self.jumps.components()))
        if self.gamma == 0 and self.sigma2 == 0 and isinstance(self.jumps, Empty):
            raise ModelError("the trivial (identically zero) process is excluded")

    @classmethod
    def from_natural_drift(cls, gamma_prime: float, sigma2: float = 0.0,
                           jumps: JumpMeasure | None = None) -> "LevyModel":
        jumps = jumps if jumps is not None else Empty()
        if not jumps.finite_variation:
            raise ModelError("natural drift needs finite small-jump first moment")
        return cls(gamma_prime + jumps.small_mean(), sigma2, jumps)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @property
    def finite_variation(self) -> bool:
        """Finite small-jump first moment (the jump part is b.v.)."""
        return self.jumps.finite_variation

    @property
    def is_bv(self) -> bool:
        return self.sigma2 == 0 and self.finite_variation

    @property
    def gamma_prime(self) -> float | None:
        """Natural drift gamma' when int_{|x|<1}|x| Pi(dx) < inf, else None."""
        if "gamma_prime" not in self._cache:
            gp = self.gamma - self.jumps.small_mean() if self.finite_variation else None
            self._cache["gamma_prime"] = gp
        return self._cache["gamma_prime"]

    def components(self) -> tuple[JumpMeasure, ...]:
        return self.jumps.components()

    def split_compound_poisson(self) -> tuple["LevyModel | None", tuple[CompoundPoisson, ...]]:
        """Remove finite-activity components, moving their compensator into gamma.

        Returns ``(rest, cpp_parts)`` where ``rest`` is None if nothing but a
        compound Poisson process (without drift or Gaussian part) remains.
        """
        cpp = tuple(c for c in self.components() if isinstance(c, CompoundPoisson))
        others = [c for c in self.components() if not isinstance(c, CompoundPoisson)]
        gamma = self.gamma - sum(c.small_mean() for c in cpp)
        if abs(gamma) <= 1e-15 * max(1.0, abs(self.gamma)):
            gamma = 0.0
        jumps = make_jumps(others)
        if gamma == 0 and self.sigma2 == 0 and isinstance(jumps, Empty):
            return None, cpp
        return LevyModel(gamma, self.sigma2, jumps), cpp

    def with_jumps(self, *extra: JumpMeasure, gamma_shift: float = 0.0) -> "LevyModel":
        return LevyModel(self.gamma + gamma_shift, self.sigma2,
                         make_jumps(list(self.components()) + list(extra)))

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "sigma2": self.sigma2,
                "jumps": [c.to_dict() for c in self.components()]}

    @classmethod
    def from_dict(cls, d: dict) -> "LevyModel":
        if not isinstance(d, dict):
            raise ModelError("model must be a JSON object")
        extra = set(d) - {"gamma", "gamma_prime", "sigma2", "jumps"}
        if extra:
            raise ModelError(f"unknown model fields: {sorted(extra)}")
        if "gamma" in d and "gamma_prime" in d:
            raise ModelError("give either gamma or gamma_prime, not both")
        raw = d.get("jumps", [])
        if not isinstance(raw, list):
            raise ModelError("jumps must be a list")
        jumps = make_jumps([jump_measure_from_dict(j) for j in raw])
        try:
            sigma2 = float(d.get("sigma2", 0.0))
            if "gamma_prime" in d:
                return cls.from_natural_drift(float(d["gamma_prime"]), sigma2, jumps)
            return cls(float(d.get("gamma", 0.0)), sigma2, jumps)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ModelError):
                raise
            raise ModelError(str(exc)) from None

    # exact increments
    @property
    def has_exact_sampler(self) -> bool:
        return all(isinstance(c, (StableTails, CompoundPoisson)) for c in self.components())

    def sample_increments(self, dt: float, rng: np.random.Generator, size: int) -> np.ndarray:
        if not self.has_exact_sampler:
            raise NoExactSampler("power-log jump measures are analysis-only")
        drift = self.gamma - self.jumps.intrinsic_gamma
        out = self.jumps.sample(dt, rng, size)
        if self.sigma2 > 0:
            out += rng.normal(0.0, math.sqrt(self.sigma2 * dt), size)
        out += drift * dt
        return out


# ---------------------------------------------------------------------------
# public operations

def levy_tails(model: LevyModel, x: float) -> tuple[float, float]:
    """(Pi_bar_plus(x), Pi_bar_minus(x))."""
    if not x > 0:
        raise ValueError("x must be positive")
    return model.jumps.tails(x)


def truncated_mean(model: LevyModel, x: float) -> float:
    """m(x) = gamma - int_{x<=|y|<1} y Pi(dy); via gamma' when it exists."""
    if not 0 < x < 1:
        raise ValueError("x must lie in (0, 1)")
    gp = model.gamma_prime
    if gp is not None:
        return gp + model.jumps.int_y_below(x)
    return model.gamma - model.jumps.int_y_above(x)


def truncated_mean_direct(model: LevyModel, x: float) -> float:
    """m(x) from the gamma-based definition only."""
    return model.gamma - model.jumps.int_y_above(x)


def truncated_variance(model: LevyModel, x: float) -> float:
    """v(x) = sigma^2 + int_{|y|<x} y^2 Pi(dy)."""
    if not 0 < x < 1:
        raise ValueError("x must lie in (0, 1)")
    return model.sigma2 + model.jumps.int_y2_below(x)


def bg_index(model: LevyModel) -> float:
    """Blumenthal-Getoor index of the jump measure."""
    return float(model.jumps.bg_index())


def char_exponent(model: LevyModel, u: float) -> complex:
    """psi(iu) = iu gamma - sigma^2 u^2 / 2 + int (e^{iuy} - 1 - iuy 1{|y|<1}) Pi(dy)."""
    return complex(1j * u * model.gamma - 0.5 * model.sigma2 * u * u) + model.jumps.psi(float(u))


def rescaled_exponent_residual(model: LevyModel, attractor, scaling, eps_list, u_grid) -> np.ndarray:
    """|eps * psi(iu / a_eps) - psi_hat(iu)| for every (eps, u) pair."""
    eps_list = list(eps_list)
    u_grid = list(u_grid)
    out = np.empty((len(eps_list), len(u_grid)))
    for i, eps in enumerate(eps_list):
        a = scaling(eps)
        for j, u in enumerate(u_grid):
            out[i, j] = abs(eps * char_exponent(model, u / a) - attractor.psi_hat(u))
    return out
