"""Suite configuration: YAML on disk, validated with pydantic before any computation.

Schema::

    seed: 20240917            # required
    n_max: 8                  # <= 12
    q: [0.3, 0.5, 0.7]        # default q list; a family entry may override it
    grid: {count: 20}         # optional s0 pins every check to one window
    tolerances: {algebraic: 1.0e-8, operator: 1.0e-7, quadrature: 1.0e-5}
    checks: [pearson, sode]   # optional subset, default all
    families:
      - name: askey_wilson
        params: {a: 0.15, b: 0.35, c: 0.45, d: 0.65}
        q: [0.5]                            # optional
        perturb: {target: sigma, eps: 1.0e-4}  # optional
    output: {path: report.json, format: json}

Numbers may be given as strings such as ``"0.3+0.1j"`` for complex values.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError
from .families import FAMILIES
from .lattice import default_tolerance

N_MAX_LIMIT = 12
DEFAULT_CONFIG = Path(__file__).with_name("data") / "default_suite.yaml"

def _to_number(v):
    if isinstance(v, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(v, (int, float)):
        return float(v)
    z = complex(str(v).replace(" ", ""))
    return z.real if z.imag == 0 else z


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Tolerances(_Strict):
    algebraic: float = Field(default_factory=default_tolerance, gt=0)
    operator: float = Field(1e-7, gt=0)
    quadrature: float = Field(1e-5, gt=0)
    identity: float = Field(1e-9, gt=0)
    rodrigues: float = Field(1e-6, gt=0)
    forms: float = Field(1e-10, gt=0)


class Grid(_Strict):
    s0: Optional[float] = None
    count: int = Field(20, ge=13)


class Perturbation(_Strict):
    target: Literal["sigma", "tau", "rho", "lambda"]
    eps: float


class FamilyEntry(_Strict):
    name: str
    params: dict = Field(default_factory=dict)
    q: Optional[List[float]] = None
    perturb: Optional[Perturbation] = None

    @field_validator("name")
    @classmethod
    def _known(cls, v):
        if v not in FAMILIES:
            raise ValueError(f"unknown family {v!r}; choose from {sorted(FAMILIES)}")
        return v

    @field_validator("params")
    @classmethod
    def _numbers(cls, v):
        return {str(k): _to_number(x) for k, x in v.items()}


class Output(_Strict):
    path: Optional[str] = None
    format: Literal["json", "csv"] = "json"


class SuiteConfig(_Strict):
    seed: int = Field(ge=0)
    n_max: int = Field(8, ge=0, le=N_MAX_LIMIT)
    q: List[float] = Field(default_factory=lambda: [0.3, 0.5, 0.7])
    grid: Grid = Field(default_factory=Grid)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    checks: Optional[List[str]] = None
    families: List[FamilyEntry] = Field(default_factory=list)
    output: Output = Field(default_factory=Output)
    rodrigues_n_max: int = Field(6, ge=0, le=N_MAX_LIMIT)
    delta_ratio_n_max: int = Field(5, ge=0, le=N_MAX_LIMIT)
    aw_n_max: int = Field(4, ge=0, le=6)
    orth_n_max: int = Field(5, ge=0, le=N_MAX_LIMIT)
    quad_points: int = Field(64, ge=8)
    trials: int = Field(3, ge=1)

    @field_validator("checks")
    @classmethod
    def _known_checks(cls, v):
        from .verifier import CHECKS

        if v is not None:
            bad = [c for c in v if c not in CHECKS]
            if bad:
                raise ValueError(f"unknown checks {bad}; choose from {list(CHECKS)}")
        return v


@dataclass(frozen=True)
class Settings:
    """Per-job view of the suite knobs that the checks read."""

    n_max: int
    grid_s0: Optional[float]
    grid_count: int
    tolerances: Tolerances
    checks: tuple
    rodrigues_n_max: int
    delta_ratio_n_max: int
    aw_n_max: int
    orth_n_max: int
    quad_points: int
    trials: int


@dataclass(frozen=True)
class Job:
    index: int
    name: str
    params: dict
    q: float
    perturb: Optional[Perturbation]
    settings: Settings


def resolve(config):
    """Expand a config into one job per (family entry, q), in file order."""
    from .verifier import CHECKS

    settings = Settings(
        n_max=config.n_max,
        grid_s0=config.grid.s0,
        grid_count=config.grid.count,
        tolerances=config.tolerances,
        checks=tuple(config.checks if config.checks is not None else CHECKS),
        rodrigues_n_max=config.rodrigues_n_max,
        delta_ratio_n_max=config.delta_ratio_n_max,
        aw_n_max=config.aw_n_max,
        orth_n_max=config.orth_n_max,
        quad_points=config.quad_points,
        trials=config.trials,
    )
    jobs = []
    for entry in config.families:
        for q in entry.q if entry.q is not None else config.q:
            jobs.append(Job(len(jobs), entry.name, dict(entry.params), q, entry.perturb, settings))
    return jobs


def load_config(path, overrides=None):
    """Read and validate a YAML suite file; any problem raises ConfigError."""
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping at the top level")
    return parse_config(raw, overrides)


def parse_config(raw, overrides=None):
    raw = dict(raw)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "tol":
            tols = dict(raw.get("tolerances") or {})
            tols["algebraic"] = value
            raw["tolerances"] = tols
        else:
            raw[key] = value
    try:
        return SuiteConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(f"invalid config: {exc}") from exc
