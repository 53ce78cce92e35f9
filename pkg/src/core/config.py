"""
Configuration Management

Settings for the simulator are loaded from config/settings.yaml, overlaid with
config/<environment>_config.yaml, then with TAMPERPROOF_* environment
variables (a .env file is honored). Consensus and network parameters are
plain frozen models so scenario files can embed their own copies.
"""

import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .environment_loader import EnvironmentLoader


class Environment(str, Enum):
    """Environment types for configuration."""

    DEVELOPMENT = "development"
    PRODUCTION = "production"
    TESTING = "testing"


class ConsensusParams(BaseModel):
    """Protocol constants shared by every node of one simulated network."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    max_uncles: int = Field(default=2, ge=0, description="Uncle headers allowed per block")
    uncle_depth: int = Field(default=6, ge=1, description="Generation window for uncles")
    fixed_tx_gas: int = Field(default=21000, ge=1, description="Gas charged per transaction")
    block_gas_limit: int = Field(default=1_000_000, ge=0, description="Gas limit of every block")
    target_spacing_s: int = Field(default=13, ge=1, description="Target block spacing in seconds")
    min_difficulty: int = Field(default=16, ge=1, description="Difficulty floor")
    difficulty_bound_divisor: int = Field(default=128, ge=1, description="Adjustment step divisor")
    epoch_blocks: int = Field(default=30, ge=1, description="Blocks per epoch seed")
    genesis_difficulty: int = Field(default=256, ge=1, description="Difficulty of the genesis block")
    genesis_timestamp: int = Field(default=0, ge=0, description="Genesis timestamp in seconds")
    max_headers_fetch: int = Field(default=192, ge=1, description="Headers per sync response")

    @model_validator(mode="after")
    def _genesis_above_floor(self) -> "ConsensusParams":
        if self.genesis_difficulty < self.min_difficulty:
            raise ValueError("genesis_difficulty must not be below min_difficulty")
        return self


class NetworkParams(BaseModel):
    """Transport and mining-effort constants of the simulated network."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    latency_ms: int = Field(default=50, ge=0, description="Constant delivery delay")
    mining_budget: int = Field(default=10_000_000, ge=1, description="Nonce trials per honest seal")


class SimulationConfig(BaseModel):
    """Where scenarios live and where runs write their artifacts."""

    scenarios_dir: Path = Field(
        default_factory=lambda: Path(__file__).parent.parent.parent / "config" / "scenarios"
    )
    output_dir: Path = Field(default=Path("runs"))
    default_seed: int = Field(default=1, ge=0)
    sweep_workers: Optional[int] = Field(default=None, ge=1, description="Process pool size for seed sweeps")


class LoggingConfig(BaseModel):
    """Logging configuration settings."""

    level: str = Field(default="INFO", description="Logging level")
    format: str = Field(default="json", description="Log format (json|text)")

    @field_validator("level")
    @classmethod
    def validate_level(cls, v: str) -> str:
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"Invalid log level. Must be one of: {valid_levels}")
        return v.upper()

    @field_validator("format")
    @classmethod
    def validate_format(cls, v: str) -> str:
        valid_formats = ["json", "text"]
        if v.lower() not in valid_formats:
            raise ValueError(f"Invalid log format. Must be one of: {valid_formats}")
        return v.lower()


class Settings(BaseSettings):
    """Main settings class that aggregates all configuration sections."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        env_prefix="TAMPERPROOF_",
        env_nested_delimiter="__",
        extra="ignore",
    )

    environment: Environment = Field(default=Environment.DEVELOPMENT)

    consensus: ConsensusParams = Field(default_factory=ConsensusParams)
    network: NetworkParams = Field(default_factory=NetworkParams)
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    config_dir: Path = Field(default_factory=lambda: Path(__file__).parent.parent.parent / "config")

    @model_validator(mode="before")
    @classmethod
    def load_config_files(cls, values: Any) -> Any:
        """Load configuration from YAML files with environment-specific overrides."""
        if not isinstance(values, dict):
            return values
        config_dir = Path(values.get("config_dir") or Path(__file__).parent.parent.parent / "config")

        environment = values.get("environment", Environment.DEVELOPMENT)
        try:
            environment = Environment(str(getattr(environment, "value", environment)).lower())
        except ValueError:
            environment = Environment.DEVELOPMENT

        loader = EnvironmentLoader()
        config_data: Dict[str, Any] = {}

        base_config_path = config_dir / "settings.yaml"
        if base_config_path.exists():
            try:
                config_data = loader.load_yaml_with_env(base_config_path)
            except Exception as e:
                logging.warning(f"Could not load base config file {base_config_path}: {e}")

        env_config_path = config_dir / f"{environment.value}_config.yaml"
        if env_config_path.exists():
            try:
                config_data = deep_merge(config_data, loader.load_yaml_with_env(env_config_path))
            except Exception as e:
                logging.warning(f"Could not load environment config file {env_config_path}: {e}")

        return deep_merge(config_data, values)

    @field_validator("environment", mode="before")
    @classmethod
    def validate_environment(cls, v: Any) -> Any:
        if isinstance(v, str):
            try:
                return Environment(v.lower())
            except ValueError:
                return Environment.DEVELOPMENT
        return v


def deep_merge(base_dict: Dict[str, Any], override_dict: Dict[str, Any]) -> Dict[str, Any]:
    """Deep merge two dictionaries, with override_dict taking precedence."""
    result = base_dict.copy()

    for key, value in override_dict.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = deep_merge(result[key], value)
        else:
            result[key] = value

    return result


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """
    Get the global settings instance.

    Returns:
        Settings: loaded once and reused
    """
    global _settings
    if _settings is None:
        try:
            _settings = Settings()
        except Exception as e:
            logging.error(f"Error loading settings: {e}")
            _settings = Settings.model_validate({"config_dir": Path("/nonexistent")})

    return _settings


def reload_settings() -> Settings:
    """Drop the cached settings and load them again."""
    global _settings
    _settings = None
    return get_settings()
