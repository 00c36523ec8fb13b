"""
Time-variable coefficients a(t), b(t) of the damped beam equation.

Covers evaluation of a, b and their derivatives, r = a/b and its primitive R,
the inverse of R, the (alpha, beta) region atlas and the exponent formulas
that govern the scaled-variable decay rates.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterable, Optional

import numpy as np
from scipy import integrate, optimize

from src.errors import (
    InvalidCoefficientError,
    NumericalIntegrationError,
    OutOfRegionError,
)

REGION_TOLERANCE = 1e-12
QUAD_RELATIVE_TOLERANCE = 1e-12
INVERSE_TOLERANCE = 1e-10
MAX_BRACKET_DOUBLINGS = 80


class CoefficientFamily(Enum):
    EXACT_POWER_LAW = "exact_power_law"
    USER_SUPPLIED = "user_supplied"


class RegionLabel(Enum):
    OMEGA1 = "Omega1"
    OMEGA2 = "Omega2"
    OMEGA3 = "Omega3"
    OMEGA4 = "Omega4"
    OMEGA5 = "Omega5"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class CoefficientModel:
    """
    The coefficient pair (a(t), b(t)) with exponents (alpha, beta).

    For the exact power law a = (1+t)^alpha and b = (1+t)^beta. A user supplied
    model provides callables for a, b, a', b'; alpha and beta then only label
    the envelope the model is meant to follow.
    """

    alpha: float = 0.0
    beta: float = 0.0
    family: CoefficientFamily = CoefficientFamily.EXACT_POWER_LAW
    a_func: Optional[Callable[[float], float]] = field(default=None, compare=False)
    b_func: Optional[Callable[[float], float]] = field(default=None, compare=False)
    a_prime_func: Optional[Callable[[float], float]] = field(default=None, compare=False)
    b_prime_func: Optional[Callable[[float], float]] = field(default=None, compare=False)
    require_positive: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise InvalidCoefficientError("alpha and beta must be finite")
        if self.family is CoefficientFamily.USER_SUPPLIED:
            missing = [name for name in ("a_func", "b_func", "a_prime_func", "b_prime_func")
                       if getattr(self, name) is None]
            if missing:
                raise InvalidCoefficientError(
                    f"User supplied coefficient model is missing: {', '.join(missing)}")

    @classmethod
    def power_law(cls, alpha: float, beta: float) -> "CoefficientModel":
        return cls(alpha=float(alpha), beta=float(beta))

    @classmethod
    def user_supplied(cls, a: Callable[[float], float], b: Callable[[float], float],
                      a_prime: Callable[[float], float], b_prime: Callable[[float], float],
                      alpha: float = 0.0, beta: float = 0.0,
                      require_positive: bool = True) -> "CoefficientModel":
        return cls(alpha=float(alpha), beta=float(beta),
                   family=CoefficientFamily.USER_SUPPLIED,
                   a_func=a, b_func=b, a_prime_func=a_prime, b_prime_func=b_prime,
                   require_positive=require_positive)

    @property
    def gamma(self) -> float:
        """Growth exponent of R: alpha - beta + 1."""
        return self.alpha - self.beta + 1.0

    @property
    def is_power_law(self) -> bool:
        return self.family is CoefficientFamily.EXACT_POWER_LAW


@dataclass(frozen=True)
class CoefficientValues:
    a: float
    b: float
    a_prime: float
    b_prime: float


@dataclass(frozen=True)
class RatioValues:
    r: float
    r_prime: float


@dataclass(frozen=True)
class ScaledFactors:
    """Coefficient factors of the scaled-variable system at scaled time s."""

    s: float
    t: float
    a: float
    b: float
    a_prime: float
    b_prime: float
    r: float
    r_prime: float
    c1: float            # r^2 e^{-s} / a
    c2: float            # r' / a
    c4: float            # e^{-s} / a
    q1: float            # a' / (r a^2)
    q2: float            # r a' / a^2
    es_over_a: float     # e^{s} / a
    c1_prime: float
    c4_prime: float


@dataclass(frozen=True)
class ExponentConstants:
    delta: float
    lambda_max: float
    supercriticality_exponent: float
    in_region: bool


@dataclass(frozen=True)
class FactorSlopes:
    """Measured and predicted log-slopes of the scaled factors against s."""

    c1_slope: float
    c1_predicted: float
    c4_slope: float
    c4_predicted: float

    @property
    def c1_relative_error(self) -> float:
        return abs(self.c1_slope - self.c1_predicted) / abs(self.c1_predicted)

    @property
    def c4_relative_error(self) -> float:
        return abs(self.c4_slope - self.c4_predicted) / abs(self.c4_predicted)


@dataclass(frozen=True)
class EnvelopeReport:
    """Smallest envelope constants observed on the sampled times."""

    c_a: float
    c_b: float
    c_a_prime: float
    c_b_prime: float
    sample_count: int

    @property
    def envelope_constant(self) -> float:
        return max(self.c_a, self.c_b)


def _check_time(t: float):
    if not math.isfinite(t) or t < 0:
        raise InvalidCoefficientError(f"Coefficient time must be finite and nonnegative, got {t}")


def eval_coeffs(model: CoefficientModel, t: float) -> CoefficientValues:
    """
    Evaluate a, b, a', b' at time t.

    Args:
        model (CoefficientModel): Coefficient model
        t (float): Time, t >= 0

    Returns:
        CoefficientValues: The four values, all finite
    """
    _check_time(t)
    if model.is_power_law:
        base = 1.0 + t
        a = base ** model.alpha
        b = base ** model.beta
        values = CoefficientValues(a=a, b=b,
                                   a_prime=model.alpha * a / base,
                                   b_prime=model.beta * b / base)
    else:
        values = CoefficientValues(a=float(model.a_func(t)), b=float(model.b_func(t)),
                                   a_prime=float(model.a_prime_func(t)),
                                   b_prime=float(model.b_prime_func(t)))

    if not all(math.isfinite(v) for v in (values.a, values.b, values.a_prime, values.b_prime)):
        raise InvalidCoefficientError(f"Coefficient model returned non-finite values at t={t}")
    if model.require_positive and (values.a <= 0 or values.b <= 0):
        raise InvalidCoefficientError(
            f"Coefficients must be positive: a({t})={values.a}, b({t})={values.b}")
    return values


def r_eval(model: CoefficientModel, t: float) -> RatioValues:
    """
    Evaluate r = a/b and r' = (a'b - ab')/b^2 at time t.

    Raises:
        InvalidCoefficientError: If b(t) <= 0
    """
    c = eval_coeffs(model, t)
    if c.b <= 0:
        raise InvalidCoefficientError(f"r = a/b needs b > 0, got b({t})={c.b}")
    return RatioValues(r=c.a / c.b, r_prime=(c.a_prime * c.b - c.a * c.b_prime) / (c.b * c.b))


def big_R(model: CoefficientModel, t: float) -> float:
    """
    R(t), the integral of r over [0, t].

    Closed form for the exact power law; adaptive quadrature otherwise.
    """
    _check_time(t)
    if t == 0:
        return 0.0
    if model.is_power_law:
        gamma = model.gamma
        if model.alpha == model.beta:
            return t
        if gamma == 0:
            return math.log1p(t)
        return math.expm1(gamma * math.log1p(t)) / gamma

    result = integrate.quad(lambda tau: r_eval(model, tau).r, 0.0, t,
                            epsabs=0.0, epsrel=QUAD_RELATIVE_TOLERANCE,
                            limit=200, full_output=1)
    # a fourth element is the quadrature warning message
    if len(result) > 3:
        raise NumericalIntegrationError(
            f"Quadrature of r over [0, {t}] did not converge: {result[3]}")
    return float(result[0])


def big_R_inverse(model: CoefficientModel, rho: float) -> float:
    """
    Solve R(t) = rho for t >= 0.

    Args:
        model (CoefficientModel): Coefficient model with R strictly increasing
        rho (float): Target value, rho >= 0

    Returns:
        float: t with |R(t) - rho| <= 1e-10 (1 + rho)
    """
    if not math.isfinite(rho) or rho < 0:
        raise InvalidCoefficientError(f"R inverse needs a finite rho >= 0, got {rho}")
    if rho == 0:
        return 0.0

    if model.is_power_law:
        gamma = model.gamma
        if model.alpha == model.beta:
            return rho
        if gamma == 0:
            return math.expm1(rho)
        base = 1.0 + gamma * rho
        if base <= 0:
            raise InvalidCoefficientError(
                f"R is bounded by {-1.0 / gamma:.6g} for alpha={model.alpha}, "
                f"beta={model.beta}; rho={rho} is unreachable")
        return math.expm1(math.log(base) / gamma)

    return _invert_by_bracketing(model, rho)


def _invert_by_bracketing(model: CoefficientModel, rho: float) -> float:
    lo, hi = 0.0, 1.0
    r_lo, r_hi = 0.0, big_R(model, hi)
    doublings = 0
    while r_hi < rho:
        lo, r_lo = hi, r_hi
        hi *= 2.0
        r_hi = big_R(model, hi)
        if r_hi <= r_lo:
            raise InvalidCoefficientError(f"R is not increasing on [{lo}, {hi}]")
        doublings += 1
        if doublings > MAX_BRACKET_DOUBLINGS:
            raise InvalidCoefficientError(f"Could not bracket R(t) = {rho}")

    try:
        t = optimize.brentq(lambda tau: big_R(model, tau) - rho, lo, hi,
                            xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
    except ValueError as e:
        raise InvalidCoefficientError(f"R inverse bracketing failed: {e}") from e

    tolerance = INVERSE_TOLERANCE * (1.0 + rho)
    for _ in range(3):
        defect = big_R(model, t) - rho
        if abs(defect) <= tolerance:
            break
        slope = r_eval(model, t).r
        if slope <= 0:
            raise InvalidCoefficientError(f"R is not increasing at t={t}")
        candidate = t - defect / slope
        if lo <= candidate <= hi:
            t = candidate

    if abs(big_R(model, t) - rho) > tolerance:
        raise NumericalIntegrationError(f"R inverse did not reach tolerance at rho={rho}")
    return t


def scaled_factors(model: CoefficientModel, s: float) -> ScaledFactors:
    """
    Coefficient factors of the scaled system at scaled time s.

    Args:
        model (CoefficientModel): Coefficient model
        s (float): Scaled time, s >= 0

    Returns:
        ScaledFactors: Values at t = R^{-1}(e^s - 1)
    """
    return scaled_factors_at_time(model, big_R_inverse(model, math.expm1(s)), s)


def scaled_factors_at_time(model: CoefficientModel, t: float,
                           s: Optional[float] = None) -> ScaledFactors:
    """Scaled-system factors at physical time t; s defaults to log(R(t) + 1)."""
    if s is None:
        s = math.log1p(big_R(model, t))
    c = eval_coeffs(model, t)
    ratio = r_eval(model, t)
    es = math.exp(s)
    a, r = c.a, ratio.r
    c1 = r * r / (es * a)
    c2 = ratio.r_prime / a
    c4 = 1.0 / (es * a)
    q1 = c.a_prime / (r * a * a)
    q2 = r * c.a_prime / (a * a)
    return ScaledFactors(
        s=s, t=t, a=a, b=c.b, a_prime=c.a_prime, b_prime=c.b_prime,
        r=r, r_prime=ratio.r_prime,
        c1=c1, c2=c2, c4=c4, q1=q1, q2=q2, es_over_a=es / a,
        c1_prime=2.0 * c2 - c1 - q2,
        c4_prime=-c4 - q1,
    )


def _region_margins(alpha: float, beta: float) -> Dict[RegionLabel, tuple]:
    return {
        RegionLabel.OMEGA1: (beta + 1.0, alpha + 1.0 - beta, 2.0 * alpha + 1.0 - beta),
        RegionLabel.OMEGA2: (beta + 1.0, beta - 2.0 * alpha - 1.0, 1.0 - beta),
        RegionLabel.OMEGA3: (-1.0 - beta, alpha + 1.0),
        RegionLabel.OMEGA4: (-1.0 - beta, -1.0 - alpha),
        RegionLabel.OMEGA5: (beta - 1.0, beta - alpha - 1.0),
    }


def classify_region(alpha: float, beta: float) -> RegionLabel:
    """
    Classify (alpha, beta) into one of the five open regions.

    A region is returned when all its strict inequalities hold with a margin
    above 1e-12; anything closer to a defining curve is Boundary.
    """
    holding = [label for label, margins in _region_margins(alpha, beta).items()
               if all(margin > REGION_TOLERANCE for margin in margins)]
    if len(holding) == 1:
        return holding[0]
    return RegionLabel.BOUNDARY


def region_holds(label: RegionLabel, alpha: float, beta: float) -> bool:
    """Whether the defining inequalities of a region hold at (alpha, beta)."""
    if label is RegionLabel.BOUNDARY:
        return False
    return all(margin > 0 for margin in _region_margins(alpha, beta)[label])


def exponent_constants(alpha: float, beta: float) -> ExponentConstants:
    """
    delta, the supremal decay gain lambda_max and the supercriticality exponent.

    Raises:
        OutOfRegionError: If alpha - beta + 1 <= 0
    """
    gamma = alpha - beta + 1.0
    if gamma <= 0:
        raise OutOfRegionError(f"alpha - beta + 1 = {gamma} must be positive")
    first = (beta + 1.0) / gamma
    second = (2.0 * alpha - beta + 1.0) / gamma
    return ExponentConstants(
        delta=min(first, second),
        lambda_max=min(0.5, 2.0 * first, second),
        supercriticality_exponent=(1.0 - beta) / gamma,
        in_region=classify_region(alpha, beta) is RegionLabel.OMEGA1,
    )


def factor_slopes(model: CoefficientModel, s_lo: float = 1.0, s_hi: float = 8.0,
                  count: int = 71) -> FactorSlopes:
    """
    Fit log c1 and log c4 against s and compare with the exponent formulas.
    """
    gamma = model.gamma
    if gamma <= 0:
        raise OutOfRegionError(f"alpha - beta + 1 = {gamma} must be positive")
    s_values = np.linspace(s_lo, s_hi, count)
    factors = [scaled_factors(model, s) for s in s_values]
    c1 = np.array([f.c1 for f in factors])
    c4 = np.array([f.c4 for f in factors])
    c1_slope = np.polyfit(s_values, np.log(c1), 1)[0]
    c4_slope = np.polyfit(s_values, np.log(c4), 1)[0]
    return FactorSlopes(
        c1_slope=float(c1_slope),
        c1_predicted=-(model.beta + 1.0) / gamma,
        c4_slope=float(c4_slope),
        c4_predicted=-(2.0 * model.alpha - model.beta + 1.0) / gamma,
    )


def verify_assumption_A(model: CoefficientModel, t_samples: Iterable[float]) -> EnvelopeReport:
    """
    Measure the envelope constants of a model against (1+t)^alpha, (1+t)^beta.

    Args:
        model (CoefficientModel): Coefficient model
        t_samples (Iterable[float]): Sample times, t >= 0

    Returns:
        EnvelopeReport: Smallest constants consistent with the samples
    """
    c_a = c_b = 1.0
    c_a_prime = c_b_prime = 0.0
    count = 0
    for t in t_samples:
        c = eval_coeffs(model, float(t))
        base = 1.0 + float(t)
        env_a = base ** model.alpha
        env_b = base ** model.beta
        c_a = max(c_a, c.a / env_a, env_a / c.a)
        c_b = max(c_b, c.b / env_b, env_b / c.b)
        c_a_prime = max(c_a_prime, abs(c.a_prime) / base ** (model.alpha - 1.0))
        c_b_prime = max(c_b_prime, abs(c.b_prime) / base ** (model.beta - 1.0))
        count += 1
    return EnvelopeReport(c_a=c_a, c_b=c_b, c_a_prime=c_a_prime, c_b_prime=c_b_prime,
                          sample_count=count)
