"""
YAML loading with environment variable substitution.

Settings files and scenario files both go through this loader, so either can
reference ``${VAR}`` (required) or ``${VAR:-default}``.
"""

import json
import os
import re
from pathlib import Path
from typing import Any, Dict, List, Union

import structlog
import yaml

logger = structlog.get_logger(__name__)


class EnvironmentLoader:
    """Handles loading YAML files with environment variable substitution."""

    ENV_VAR_PATTERN = re.compile(r"\$\{([^}^{]+)\}")

    @classmethod
    def substitute_env_vars(cls, value: Any) -> Any:
        """
        Recursively substitute environment variables in configuration values.

        Args:
            value: Configuration value (string, dict, list or scalar)

        Returns:
            Value with environment variables substituted
        """
        if isinstance(value, str):
            return cls._substitute_string(value)
        if isinstance(value, dict):
            return {k: cls.substitute_env_vars(v) for k, v in value.items()}
        if isinstance(value, list):
            return [cls.substitute_env_vars(item) for item in value]
        return value

    @classmethod
    def _substitute_string(cls, text: str) -> Any:
        if not cls.ENV_VAR_PATTERN.search(text):
            return text

        def replace_var(match: "re.Match[str]") -> str:
            var_expr = match.group(1)
            if ":-" in var_expr:
                var_name, default_value = var_expr.split(":-", 1)
                return os.getenv(var_name.strip(), default_value.strip())
            var_name = var_expr.strip()
            value = os.getenv(var_name)
            if value is None:
                raise ValueError(f"Required environment variable '{var_name}' is not set")
            return value

        return cls._convert_type(cls.ENV_VAR_PATTERN.sub(replace_var, text))

    @classmethod
    def _convert_type(cls, value: str) -> Union[str, int, float, bool, List[Any]]:
        """Convert a substituted string to int, float, bool or a JSON list."""
        try:
            return int(value)
        except ValueError:
            pass
        try:
            return float(value)
        except ValueError:
            pass

        if value.lower() in ("true", "yes", "on"):
            return True
        if value.lower() in ("false", "no", "off"):
            return False

        if value.startswith("[") and value.endswith("]"):
            try:
                return json.loads(value)
            except ValueError:
                pass

        return value

    @classmethod
    def load_yaml_text(cls, text: str, source: str = "<string>") -> Dict[str, Any]:
        """
        Parse YAML text with environment variable substitution.

        Raises:
            yaml.YAMLError: If the text has invalid YAML syntax
            ValueError: If a required environment variable is missing or the
                document is not a mapping
        """
        try:
            content = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise yaml.YAMLError(f"Invalid YAML syntax in {source}: {e}")

        if content is None:
            return {}
        if not isinstance(content, dict):
            raise ValueError(f"{source} must contain a mapping at top level")
        return cls.substitute_env_vars(content)

    @classmethod
    def load_yaml_with_env(cls, file_path: Union[str, Path]) -> Dict[str, Any]:
        """
        Load a YAML file with environment variable substitution.

        Args:
            file_path: Path to the YAML file

        Returns:
            Dictionary with environment variables substituted

        Raises:
            FileNotFoundError: If the file doesn't exist
            yaml.YAMLError: If the file has invalid YAML syntax
            ValueError: If required environment variables are missing
        """
        file_path = Path(file_path)
        if not file_path.exists():
            raise FileNotFoundError(f"Configuration file not found: {file_path}")

        logger.debug("Loading YAML", path=str(file_path))
        return cls.load_yaml_text(file_path.read_text(encoding="utf-8"), source=str(file_path))
