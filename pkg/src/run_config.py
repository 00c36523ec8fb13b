"""
Run configuration: a KEY=value document read with python-dotenv, validated
into a RunConfig and turned into the models the pipeline needs.
"""

import dataclasses
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from dotenv import dotenv_values

from src.coefficients import CoefficientFamily, CoefficientModel
from src.energy import EnergyWeights
from src.errors import InvalidConfigError
from src.nonlinearity import NonlinearityModel, TildeForm
from src.solver import IntegratorConfig, Scheme
from src.spectral_grid import Grid, next_power_of_two, weighted_norm

DATA_VARIANTS = ("bump", "bump_velocity", "random")
OUTPUT_FORMATS = ("csv", "xlsx")
TRUE_WORDS = ("1", "true", "yes", "on")
FALSE_WORDS = ("0", "false", "no", "off")


@dataclass(frozen=True)
class RunConfig:
    # coefficients
    alpha: float = 0.0
    beta: float = 0.0
    family: str = CoefficientFamily.EXACT_POWER_LAW.value
    # nonlinearity
    mu: float = 0.0
    p: float = 3.0
    tilde_form: str = TildeForm.NONE.value
    # grid
    L: float = 20.0
    n: int = 512
    dx: float = 0.2
    domain_margin: float = 1.05
    # integrator
    t_max: float = 1e4
    dt_initial: float = 1e-2
    dt_max: float = 0.25
    error_tol: float = 1e-9
    safety: float = 0.9
    scheme: str = Scheme.EXP_MIDPOINT.value
    adaptive: bool = True
    # schedule
    s_max: float = 6.0
    snapshots_per_unit_s: float = 100.0
    snapshot_stride: int = 10
    # analysis
    fit_window: Tuple[float, float] = (2.0, 6.0)
    lambda_fraction: float = 0.9
    slope_threshold: float = -0.35
    # energy weights
    c0: float = 4.0
    c1_0: float = 4.0
    c1_1: float = 4.0
    c2: float = 4.0
    ctilde0: float = 8.0
    ctilde1_0: float = 4.0
    ctilde1_1: float = 2.0
    # data
    epsilon: float = 0.05
    seed: int = 0
    data_variant: str = "bump"
    # output
    out_dir: str = "output"
    formats: Tuple[str, ...] = ("csv",)
    workers: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self):
        """
        Check every key against its documented range.

        Raises:
            InvalidConfigError: On the first violated range
            InvalidModelError: If the nonlinearity violates p >= 3
        """
        if self.family != CoefficientFamily.EXACT_POWER_LAW.value:
            raise InvalidConfigError(
                f"family must be {CoefficientFamily.EXACT_POWER_LAW.value} in a config file "
                f"(user-supplied models are built in code), got {self.family}")
        if self.tilde_form not in (TildeForm.NONE.value, TildeForm.POWER_LAW.value):
            raise InvalidConfigError(f"tilde_form must be none or power_law, got {self.tilde_form}")
        for name in ("L", "dx", "t_max", "s_max", "snapshots_per_unit_s"):
            if not getattr(self, name) > 0:
                raise InvalidConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.domain_margin < 1:
            raise InvalidConfigError(f"domain_margin must be at least 1, got {self.domain_margin}")
        if self.snapshot_stride < 1 or self.workers < 1:
            raise InvalidConfigError("snapshot_stride and workers must be at least 1")
        if not self.fit_window[0] < self.fit_window[1]:
            raise InvalidConfigError(f"fit_window must satisfy lo < hi, got {self.fit_window}")
        if not 0 < self.lambda_fraction <= 1:
            raise InvalidConfigError(f"lambda_fraction must be in (0, 1], got {self.lambda_fraction}")
        if not self.epsilon >= 0:
            raise InvalidConfigError(f"epsilon must be nonnegative, got {self.epsilon}")
        if self.data_variant not in DATA_VARIANTS:
            raise InvalidConfigError(
                f"data_variant must be one of {', '.join(DATA_VARIANTS)}, got {self.data_variant}")
        if not self.formats or any(fmt not in OUTPUT_FORMATS for fmt in self.formats):
            raise InvalidConfigError(f"formats must be drawn from {', '.join(OUTPUT_FORMATS)}")
        try:
            Scheme(self.scheme)
        except ValueError:
            raise InvalidConfigError(f"Unknown scheme: {self.scheme}") from None

        # model constructors carry the remaining checks
        self.coefficient_model()
        self.nonlinearity_model()
        self.integrator_config()
        self.energy_weights()
        self.y_grid()

    def coefficient_model(self) -> CoefficientModel:
        return CoefficientModel.power_law(self.alpha, self.beta)

    def nonlinearity_model(self) -> NonlinearityModel:
        return NonlinearityModel(mu=self.mu, p=self.p, tilde_form=TildeForm(self.tilde_form))

    def integrator_config(self) -> IntegratorConfig:
        return IntegratorConfig(dt_initial=self.dt_initial, dt_max=self.dt_max,
                                safety=self.safety, error_tol=self.error_tol,
                                scheme=Scheme(self.scheme), adaptive=self.adaptive)

    def energy_weights(self) -> EnergyWeights:
        return EnergyWeights(c0=self.c0, c1_0=self.c1_0, c1_1=self.c1_1, c2=self.c2,
                             ctilde0=self.ctilde0, ctilde1_0=self.ctilde1_0,
                             ctilde1_1=self.ctilde1_1)

    def y_grid(self) -> Grid:
        return Grid(self.L, self.n)

    def with_overrides(self, **overrides) -> "RunConfig":
        """Copy with some keys replaced (validated again)."""
        unknown = set(overrides) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            raise InvalidConfigError(f"Unknown config keys: {', '.join(sorted(unknown))}")
        return dataclasses.replace(self, **overrides)

    def to_dict(self) -> Dict[str, object]:
        values = dataclasses.asdict(self)
        values["fit_window"] = list(self.fit_window)
        values["formats"] = list(self.formats)
        return values


def _parse_bool(key: str, text: str) -> bool:
    word = text.strip().lower()
    if word in TRUE_WORDS:
        return True
    if word in FALSE_WORDS:
        return False
    raise InvalidConfigError(f"{key} must be true or false, got {text!r}")


def _parse_value(field: dataclasses.Field, text: Optional[str]):
    key = field.name
    if text is None or not text.strip():
        raise InvalidConfigError(f"{key} has no value")
    text = text.strip()
    default = field.default
    try:
        if key == "fit_window":
            lo, hi = text.split(":")
            return float(lo), float(hi)
        if key == "formats":
            return tuple(part.strip().lower() for part in text.split(",") if part.strip())
        if isinstance(default, bool):
            return _parse_bool(key, text)
        if isinstance(default, int):
            value = float(text)
            if not value.is_integer():
                raise ValueError(text)
            return int(value)
        if isinstance(default, float):
            value = float(text)
            if math.isnan(value):
                raise ValueError(text)
            return value
        return text
    except ValueError:
        raise InvalidConfigError(f"Cannot parse {key}={text!r}") from None


def parse_run_config(values: Dict[str, Optional[str]]) -> RunConfig:
    """
    Build a RunConfig from raw key/value strings.

    Raises:
        InvalidConfigError: Unknown key or unparsable value
    """
    fields = {f.name: f for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(values) - set(fields))
    if unknown:
        raise InvalidConfigError(f"Unknown config keys: {', '.join(unknown)}")
    parsed = {key: _parse_value(fields[key], text) for key, text in values.items()}
    return RunConfig(**parsed)


def load_run_config(path: Optional[str] = None) -> RunConfig:
    """
    Read a KEY=value config document; missing keys keep their defaults.

    Args:
        path (Optional[str]): Config file; None gives the default configuration

    Returns:
        RunConfig: Validated configuration

    Raises:
        InvalidConfigError: Missing file, unknown key or unparsable value
    """
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as stream:
            values = dotenv_values(stream=stream)
    except OSError as e:
        raise InvalidConfigError(f"Cannot read config file {path}: {e}") from None
    return parse_run_config(dict(values))


def x_grid(config: RunConfig, R_end: float) -> Grid:
    """
    Physical grid wide enough to hold the y-grid image up to R_end at spacing <= dx.
    """
    half_width = config.L * math.sqrt(R_end + 1.0) * config.domain_margin
    n = max(next_power_of_two(2.0 * half_width / config.dx), config.n)
    return Grid(half_width, n)


def data_size(grid: Grid, u0: np.ndarray, u1: np.ndarray) -> float:
    """
    Size of the data pair: ||u0|| in H^{2,1} and H^{3,0} plus ||u1|| in H^{0,1} and H^{1,0}.
    """
    return (weighted_norm(grid, u0, 2, 1.0) + weighted_norm(grid, u0, 3, 0.0)
            + weighted_norm(grid, u1, 0, 1.0) + weighted_norm(grid, u1, 1, 0.0))


def initial_data(config: RunConfig, grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
    """
    Initial displacement and velocity for the configured data variant.

    The displacement shape e^{-x^2/4} (1 + 0.3 cos(x/2) e^{-x^2/8}) is scaled so
    that its H^{2,1} + H^{3,0} norm equals epsilon.

    bump: zero velocity.
    bump_velocity: velocity -A/2 e^{-x^2/4}, A the amplitude of the scaled bump.
    random: seeded trigonometric perturbation in place of the cosine.
    """
    x = grid.points
    envelope = np.exp(-0.25 * x * x)
    if config.data_variant == "random":
        rng = np.random.default_rng(config.seed)
        modes = 4
        frequencies = rng.uniform(0.0, 1.5, modes)
        amplitudes = rng.normal(size=modes) / math.sqrt(modes)
        phases = rng.uniform(0.0, 2.0 * math.pi, modes)
        wiggle = np.cos(np.outer(x, frequencies) + phases) @ amplitudes
    else:
        wiggle = np.cos(0.5 * x)
    shape = envelope * (1.0 + 0.3 * wiggle * np.exp(-0.125 * x * x))
    amplitude = config.epsilon / data_size(grid, shape, np.zeros_like(x))
    u0 = amplitude * shape
    if config.data_variant == "bump_velocity":
        u1 = -0.5 * amplitude * envelope
    else:
        u1 = np.zeros_like(x)
    return u0, u1
