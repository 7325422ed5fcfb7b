"""Configuration management for the expert advice lab."""

import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional

from dotenv import dotenv_values, load_dotenv
from pydantic import AliasChoices, BaseModel, Field, field_validator, model_validator

# Load environment variables from .env file if it exists
load_dotenv()

PolicyName = Literal["exp4", "qftrl", "qftrl-doubling"]
ProtocolName = Literal["standard", "restricted"]
InstanceModelName = Literal["iid_dirichlet", "clustered", "identical", "hard_clique"]
LossModelName = Literal["iid_uniform", "adversarial_switch"]

# Short keys accepted in config files and by the CLI
SHORT_KEYS = {"N": "n_experts", "K": "n_actions", "T": "horizon", "J": "initial_guess"}


class Settings(BaseModel):
    """Process-wide settings with environment variable support."""

    model_config = {"validate_default": True}

    max_parallel_workers: int = Field(
        default_factory=lambda: int(os.getenv("LAB_MAX_WORKERS", "3")),
        description="Worker threads used to run seeds concurrently",
    )
    output_dir: Path = Field(
        default_factory=lambda: Path(os.getenv("LAB_OUTPUT_DIR", "results")),
        description="Default directory for rounds.csv and summary.json",
    )
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field(
        default_factory=lambda: os.getenv("LAB_LOG_LEVEL", "INFO").upper(),
        description="Root log level",
    )
    log_file: str = Field(
        default_factory=lambda: os.getenv("LAB_LOG_FILE", "expert_advice_lab.log"),
        description="Log file written next to the console stream",
    )
    capacity_max_iters: int = Field(
        default_factory=lambda: int(os.getenv("LAB_CAPACITY_MAX_ITERS", "500")),
        description="Iteration cap of the capacity ascent",
    )
    capacity_tol: float = Field(
        default_factory=lambda: float(os.getenv("LAB_CAPACITY_TOL", "1e-9")),
        description="Improvement threshold that stops the capacity ascent",
    )

    @field_validator("max_parallel_workers")
    @classmethod
    def validate_max_parallel_workers(cls, v):
        """Validate max parallel workers is within reasonable bounds."""
        if v < 1 or v > 32:
            raise ValueError("max_parallel_workers must be between 1 and 32")
        return v

    @field_validator("capacity_max_iters")
    @classmethod
    def validate_capacity_max_iters(cls, v):
        if v < 1 or v > 100_000:
            raise ValueError("capacity_max_iters must be between 1 and 100000")
        return v

    @field_validator("capacity_tol")
    @classmethod
    def validate_capacity_tol(cls, v):
        if v <= 0.0:
            raise ValueError("capacity_tol must be positive")
        return v


def get_settings() -> Settings:
    """Get application settings."""
    return Settings()


def parse_seeds(value: Any) -> List[int]:
    """Parse ``"a..b"`` (inclusive), ``"1,4,9"`` or an iterable of ints."""
    if isinstance(value, int):
        return [value]
    if isinstance(value, str):
        text = value.strip()
        if not text:
            return []
        if ".." in text:
            start, _, stop = text.partition("..")
            first, last = int(start), int(stop)
            if last < first:
                raise ValueError(f"empty seed range: {text!r}")
            return list(range(first, last + 1))
        return [int(part) for part in text.split(",") if part.strip()]
    return [int(v) for v in value]


class RunConfig(BaseModel):
    """One experiment: a policy, a protocol, an instance source and a seed list."""

    model_config = {"populate_by_name": True, "extra": "forbid", "validate_default": True}

    policy: PolicyName = "qftrl"
    protocol: ProtocolName = "standard"
    n_experts: int = Field(default=8, ge=1, validation_alias=AliasChoices("n_experts", "N"))
    n_actions: int = Field(default=2, ge=1, validation_alias=AliasChoices("n_actions", "K"))
    horizon: int = Field(default=1000, ge=1, validation_alias=AliasChoices("horizon", "T"))
    initial_guess: Optional[float] = Field(
        default=None,
        validation_alias=AliasChoices("initial_guess", "J"),
        description="Doubling policy initial guess; None selects ln(e^2 N)/T",
    )
    q: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    eta: Optional[float] = Field(default=None, gt=0.0)
    instance_model: InstanceModelName = "iid_dirichlet"
    loss_model: LossModelName = "iid_uniform"
    groups: int = Field(default=4, ge=1)
    gap: float = Field(default=0.05, ge=0.0, le=0.5)
    instance_file: Optional[Path] = None
    instance_seed: Optional[int] = None
    seeds: List[int] = Field(default_factory=lambda: [0])
    capacity_diagnostics: bool = False
    out_dir: Path = Field(default_factory=lambda: get_settings().output_dir)
    max_workers: int = Field(default_factory=lambda: get_settings().max_parallel_workers, ge=1, le=32)

    @field_validator("seeds", mode="before")
    @classmethod
    def validate_seeds(cls, v):
        seeds = parse_seeds(v)
        if not seeds:
            raise ValueError("seeds must not be empty")
        return seeds

    @field_validator("instance_file")
    @classmethod
    def validate_instance_file(cls, v):
        if v is not None and not Path(v).is_file():
            raise ValueError(f"instance file not found: {v}")
        return v

    @model_validator(mode="after")
    def validate_consistency(self):
        if self.initial_guess is not None and not 0.0 < self.initial_guess <= self.n_experts:
            raise ValueError(
                f"J must lie in (0, N] = (0, {self.n_experts}], got {self.initial_guess}"
            )
        if self.instance_file is None and self.instance_model == "hard_clique":
            if not self.n_experts > self.n_actions >= 2:
                raise ValueError("hard_clique instances need N > K >= 2")
        if self.instance_file is None and self.instance_model == "clustered":
            if self.groups > min(self.n_actions, self.n_experts):
                raise ValueError("groups must not exceed min(K, N)")
        return self

    @classmethod
    def from_sources(
        cls,
        config_path: Optional[Path] = None,
        overrides: Optional[Mapping[str, Any]] = None,
    ) -> "RunConfig":
        """Build a config from a flat key=value file, then apply overrides.

        Short keys (N, K, T, J) are renamed to their field names on both sides
        before merging, so a file ``N=16`` and an ``n_experts`` override land
        on the same key. Overrides whose value is None are ignored so that
        unset CLI flags do not shadow file values.
        """
        data: Dict[str, Any] = {}
        if config_path is not None:
            if not Path(config_path).is_file():
                raise FileNotFoundError(f"Config file not found: {config_path}")
            data.update(
                _canonical_keys(
                    {key: value for key, value in dotenv_values(config_path).items() if value is not None}
                )
            )
        if overrides:
            data.update(
                _canonical_keys({key: value for key, value in overrides.items() if value is not None})
            )
        return cls.model_validate(data)


def _canonical_keys(values: Mapping[str, Any]) -> Dict[str, Any]:
    return {SHORT_KEYS.get(key, key): value for key, value in values.items()}
