"""Named reference models used by tests, scripts and the CLI."""
from __future__ import annotations

import math

from .model import (
    CompoundPoisson, LevyModel, NormalLaw, PowerLogTail, ShiftedAtom, StableTails,
)


def brownian(sigma2: float = 1.0) -> LevyModel:
    return LevyModel(0.0, sigma2)


def brownian_with_jumps() -> LevyModel:
    # Gaussian part dominates small-time behaviour
    return LevyModel(0.3, 1.0, StableTails(1.0, 1.0, 0.7))


def drift_with_cpp(gamma_prime: float = 2.0) -> LevyModel:
    return LevyModel.from_natural_drift(gamma_prime, 0.0, CompoundPoisson(1.0, NormalLaw(0.0, 1.0)))


def compound_poisson() -> LevyModel:
    return LevyModel(0.0, 0.0, CompoundPoisson(1.0, NormalLaw(0.0, 1.0)))


def symmetric_stable(alpha: float, c: float = 1.0) -> LevyModel:
    return LevyModel(0.0, 0.0, StableTails(c, c, alpha))


def cauchy_asymmetric(c_plus: float = 1.0, c_minus: float = 2.0) -> LevyModel:
    # 1-stable with unequal tails; m(x) = (c_minus - c_plus) log(1/x)
    return LevyModel(0.0, 0.0, StableTails(c_plus, c_minus, 1.0))


def log_brownian() -> LevyModel:
    # density y^-3 log^-2(1/y) on (0, 1/2): v(x) = 1/log(1/x)
    return LevyModel(0.0, 0.0, PowerLogTail("+", 2.0, 2.0, 0.5, form="density"))


def log_cauchy() -> LevyModel:
    # Pi_bar_+ = Pi_bar_- = x^-1 log^-2(1/x) near 0, zero natural drift
    return LevyModel.from_natural_drift(0.0, 0.0, PowerLogTail("both", 1.0, 2.0, math.exp(-2.0)))


def shifted_log_cauchy() -> LevyModel:
    # symmetric x^-1 log^-1(1/x) tails plus an atom of mass 1 at 1/2, gamma = 0
    return LevyModel(0.0, 0.0, PowerLogTail("both", 1.0, 1.0, 0.25)).with_jumps(ShiftedAtom(0.5, 1.0))


FIXTURES = {
    "brownian": brownian,
    "brownian_with_jumps": brownian_with_jumps,
    "drift_with_cpp": drift_with_cpp,
    "compound_poisson": compound_poisson,
    "stable_0.5": lambda: symmetric_stable(0.5),
    "stable_1.5": lambda: symmetric_stable(1.5),
    "cauchy_asymmetric": cauchy_asymmetric,
    "log_brownian": log_brownian,
    "log_cauchy": log_cauchy,
    "shifted_log_cauchy": shifted_log_cauchy,
}


def fixture(name: str) -> LevyModel:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {sorted(FIXTURES)}") from None
