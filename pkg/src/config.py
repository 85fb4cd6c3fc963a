"""Experiment config files and the built-in figure presets."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError
from .model import NOISE_SCHEME, EquationForm, NoiseSpec, PulseSpec, SystemSpec
from .quantum_dynamics import IntegratorConfig
from .spin_algebra import HalfInteger

logger = logging.getLogger(__name__)


class ScenarioConfig(BaseModel):
    """One experiment: chain, fields, pulse, damping, noise and integration.

    Field names are the config-file keys; `lambda` maps to `damping`.
    """

    model_config = ConfigDict(extra="forbid", populate_by_name=True, frozen=True)

    name: str = "custom"
    N: int = Field(1, ge=1)
    S: str = "1/2"
    J: float = 0.0
    Bz: float = 0.0
    B0x: float = 0.0
    t0: float = 0.0
    TW: float = Field(1.0, gt=0)
    pulse_site: int = Field(1, ge=1)
    damping: float = Field(0.0, alias="lambda", ge=0)
    D: float = Field(0.0, ge=0)
    seed: int = Field(0, ge=0, lt=2**64)
    dt: float = Field(0.001, gt=0)
    t_end: float = Field(10.0, gt=0)
    scheme: Literal["piecewise-constant"] = NOISE_SCHEME
    form: EquationForm = EquationForm.LLG
    sample_every: int = Field(100, ge=1)
    ensemble: int = Field(1, ge=1)
    workers: int = Field(4, ge=1)

    @field_validator("S", mode="before")
    @classmethod
    def _normalize_spin(cls, value: Any) -> str:
        spin = HalfInteger.parse(value)
        if spin.twice_value < 1:
            raise ValueError("S must be at least 1/2")
        return str(spin)

    @model_validator(mode="after")
    def _check_pulse_site(self) -> "ScenarioConfig":
        if self.pulse_site > self.N:
            raise ValueError(f"pulse_site {self.pulse_site} exceeds N={self.N}")
        return self

    @property
    def spin(self) -> HalfInteger:
        return HalfInteger.parse(self.S)

    @property
    def stochastic(self) -> bool:
        return self.D > 0.0

    def system_spec(self) -> SystemSpec:
        pulse = None
        if self.B0x != 0.0:
            pulse = PulseSpec(
                amplitude=self.B0x, center=self.t0, width=self.TW, target_site=self.pulse_site
            )
        return SystemSpec(
            n_sites=self.N,
            spin=self.spin,
            exchange=self.J,
            field_z=self.Bz,
            pulse=pulse,
            damping=self.damping,
        )

    def integrator_config(self) -> IntegratorConfig:
        return IntegratorConfig(dt=self.dt, sample_every=self.sample_every)

    def noise_spec(self) -> NoiseSpec:
        return NoiseSpec(strength=self.D, seed=self.seed, scheme=self.scheme)

    def with_overrides(self, **overrides: Any) -> "ScenarioConfig":
        """Copy with CLI overrides applied (None values are ignored), re-validated."""
        updates = {k: v for k, v in overrides.items() if v is not None}
        if not updates:
            return self
        data = self.model_dump(by_alias=True)
        data.update({("lambda" if k == "damping" else k): v for k, v in updates.items()})
        return parse_config(data)

    def to_document(self) -> Dict[str, Any]:
        """JSON-ready dict using the config-file keys."""
        return self.model_dump(by_alias=True, mode="json")


def parse_config(data: Dict[str, Any]) -> ScenarioConfig:
    """Validate a config mapping.

    Raises:
        ConfigError: If a key is unknown or a value is invalid
    """
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid config: {e}") from e


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    """Read and validate a JSON config file.

    Raises:
        ConfigError: If the file is unreadable, not JSON, or invalid
    """
    config_path = Path(path)
    logger.info(f"Loading config from {config_path}")
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"Cannot read config {config_path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config {config_path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"Config {config_path} must hold a JSON object")
    data.setdefault("name", config_path.stem)
    return parse_config(data)


PRESETS: Dict[str, ScenarioConfig] = {
    "fig1": parse_config(
        {
            "name": "fig1",
            "N": 1,
            "S": "1",
            "J": 0.0,
            "Bz": -5.1,
            "B0x": 3.27,
            "t0": 2.0,
            "TW": 0.02,
            "lambda": 0.2,
            "t_end": 20.0,
        }
    ),
    "fig2": parse_config(
        {
            "name": "fig2",
            "N": 3,
            "S": "1",
            "J": 1.0,
            "Bz": 0.1,
            "B0x": 3.27,
            "t0": 10.0,
            "TW": 0.02,
            "lambda": 0.1,
            "t_end": 50.0,
        }
    ),
    "fig3": parse_config(
        {
            "name": "fig3",
            "N": 3,
            "S": "1/2",
            "J": 4.0,
            "Bz": -2.0,
            "B0x": 3.27,
            "t0": 10.0,
            "TW": 0.02,
            "lambda": 0.1,
            "t_end": 120.0,
        }
    ),
}


def get_preset(name: str) -> ScenarioConfig:
    """Look up a built-in preset.

    Raises:
        ConfigError: If the preset does not exist
    """
    preset: Optional[ScenarioConfig] = PRESETS.get(name)
    if preset is None:
        raise ConfigError(f"Unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return preset
