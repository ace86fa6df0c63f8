"""Experiment configuration: pydantic models loaded from TOML, with a canonical writer."""

import json
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..core.integrator import IntegratorConfig
from ..core.problem import DEFAULT_GRID_POINTS, PiecewiseFn, ProblemSpec, ValidatedProblem, validate_problem
from ..core.quadrature import QuadratureConfig
from ..exceptions import ConfigError, RetSpecError
from ..utils.expr import parse_expr


class ExperimentKind(str, Enum):
    SPECTRUM = "spectrum"
    TRACE = "trace"
    NODAL = "nodal"
    VERIFY = "verify"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ProblemSection(_Section):
    p1: float
    p2: float
    a1: float
    a2: float
    d: float
    gamma1: float
    gamma2: float
    delta1: float
    delta2: float
    q_left: str = "0"
    q_right: str = "0"
    delta_left: str = "0"
    delta_right: str = "0"
    grid_points: int = Field(DEFAULT_GRID_POINTS, ge=2)

    @field_validator("q_left", "q_right", "delta_left", "delta_right")
    @classmethod
    def _parses(cls, value: str) -> str:
        try:
            parse_expr(value)
        except RetSpecError as e:
            raise ValueError(str(e)) from e
        return value


class ExperimentSection(_Section):
    kind: ExperimentKind = ExperimentKind.SPECTRUM
    n_max: int = Field(10, ge=1)
    output_path: str = "out"
    seed: int = 42
    strict: bool = False
    nodal_n: List[int] = Field(default_factory=list)  # default: [n_max]
    trace_checkpoints: List[int] = Field(default_factory=list)  # default: 25, 50, 100, 200 up to n_max, else quarters


class IntegratorSection(_Section):
    step_count: int = 2048
    corrector_iterations: int = 2
    interpolation_order: int = 3
    reference_abs_lambda: float = 64.0


class QuadratureSection(_Section):
    points_per_panel: int = 16
    min_panels: int = 8
    panels_per_oscillation: int = 4


class ExperimentConfig(_Section):
    problem: ProblemSection
    experiment: ExperimentSection = Field(default_factory=ExperimentSection)
    integrator: IntegratorSection = Field(default_factory=IntegratorSection)
    quadrature: QuadratureSection = Field(default_factory=QuadratureSection)

    def problem_spec(self) -> ProblemSpec:
        p = self.problem
        return ProblemSpec(
            p1=p.p1,
            p2=p.p2,
            a1=p.a1,
            a2=p.a2,
            d=p.d,
            gamma1=p.gamma1,
            gamma2=p.gamma2,
            delta1=p.delta1,
            delta2=p.delta2,
            q=PiecewiseFn(parse_expr(p.q_left), parse_expr(p.q_right), vectorized=True),
            delta_fn=PiecewiseFn(
                parse_expr(p.delta_left), parse_expr(p.delta_right), vectorized=True
            ),
        )

    def validated_problem(self) -> ValidatedProblem:
        return validate_problem(self.problem_spec(), self.problem.grid_points)

    def integrator_config(self) -> IntegratorConfig:
        cfg = IntegratorConfig(**self.integrator.model_dump())
        cfg.validate()
        return cfg

    def quadrature_config(self) -> QuadratureConfig:
        cfg = QuadratureConfig(**self.quadrature.model_dump())
        cfg.validate()
        return cfg


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Invalid TOML in {source}: {e}") from e
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration in {source}:\n{e}") from e


def load_config(path: Path) -> ExperimentConfig:
    """Load and validate an experiment configuration file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"Config file not found: {path}")
    return parse_config(text, str(path))


def _toml_value(value: Any) -> str:
    if isinstance(value, Enum):
        value = value.value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, list):
        return "[" + ", ".join(_toml_value(item) for item in value) + "]"
    raise ConfigError(f"cannot serialize {value!r} to TOML")


def dump_config(cfg: ExperimentConfig) -> str:
    """Canonical TOML: sections and keys sorted, floats as repr."""
    data: Dict[str, Dict[str, Any]] = cfg.model_dump()
    lines: List[str] = []
    for section in sorted(data):
        if lines:
            lines.append("")
        lines.append(f"[{section}]")
        for key in sorted(data[section]):
            lines.append(f"{key} = {_toml_value(data[section][key])}")
    return "\n".join(lines) + "\n"
