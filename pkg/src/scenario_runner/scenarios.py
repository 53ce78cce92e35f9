"""
Scenario loading.

A scenario is one YAML file under ``config/scenarios`` (or any path). It is
read through the EnvironmentLoader, so ``${VAR:-default}`` works, and
validated into a ScenarioConfig. Format in docs/config.md.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import structlog
import yaml
from pydantic import ValidationError as PydanticValidationError

from src.core.config import deep_merge, get_settings
from src.core.environment_loader import EnvironmentLoader
from src.models.exceptions import ConfigError
from src.models.input_models import ScenarioConfig

logger = structlog.get_logger(__name__)

BUNDLED_SCENARIOS = ("demo-recovery", "s1-low", "s1-high", "s2-low", "s2-high", "s3-light", "majority-attack")


def scenarios_dir() -> Path:
    return get_settings().simulation.scenarios_dir


def list_scenarios(directory: Optional[Path] = None) -> List[str]:
    """Names of the scenario files in a directory, sorted."""
    directory = directory or scenarios_dir()
    return sorted(p.stem for p in directory.glob("*.yaml"))


def resolve_scenario_path(name_or_path: Union[str, Path]) -> Path:
    """
    Accept either a file path or the name of a bundled scenario.

    Raises:
        ConfigError: If neither resolves to an existing file
    """
    path = Path(name_or_path)
    if path.is_file():
        return path
    bundled = scenarios_dir() / f"{name_or_path}.yaml"
    if bundled.is_file():
        return bundled
    raise ConfigError(str(name_or_path), "no such file or bundled scenario")


def with_settings_defaults(data: Dict[str, Any]) -> Dict[str, Any]:
    """
    Layer a scenario mapping over the loaded settings.

    The settings supply the consensus and network sections and the default
    seed; whatever the scenario states wins, key by key.
    """
    settings = get_settings()
    merged = dict(data)
    for section in ("consensus", "network"):
        own = data.get(section)
        if own is None or isinstance(own, dict):
            merged[section] = deep_merge(getattr(settings, section).model_dump(), own or {})
    merged.setdefault("seed", settings.simulation.default_seed)
    return merged


def parse_scenario(data: Dict[str, Any], source: str = "<dict>") -> ScenarioConfig:
    """
    Validate a scenario mapping on top of the settings defaults.

    Raises:
        ConfigError: If the mapping does not describe a valid scenario
    """
    try:
        return ScenarioConfig.model_validate(with_settings_defaults(data))
    except PydanticValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(part) for part in err['loc']) or '<root>'}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(source, problems) from e


def load_scenario(name_or_path: Union[str, Path]) -> Tuple[ScenarioConfig, Path]:
    """
    Load and validate a scenario file.

    Args:
        name_or_path: Path to a YAML file or a bundled scenario name

    Returns:
        (config, directory the file lives in); relative fixture paths
        resolve against that directory

    Raises:
        ConfigError: If the file is missing, unparsable or invalid
    """
    path = resolve_scenario_path(name_or_path)
    try:
        data = EnvironmentLoader.load_yaml_with_env(path)
    except (OSError, yaml.YAMLError, ValueError) as e:
        raise ConfigError(str(path), str(e)) from e

    config = parse_scenario(data, str(path))
    logger.info("Scenario loaded", scenario=config.name, kind=config.kind, path=str(path), nodes=len(config.nodes))
    return config, path.parent
