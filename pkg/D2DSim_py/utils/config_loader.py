"""
Experiment config loader.

Config files are flat `key = value` lines with `#` comments, the same shape
as a .env file, so they are tokenised with python-dotenv's parser and then
validated by the pydantic config models. Omitted keys keep their defaults.
"""
import io
import logging
from typing import Any, Dict, Mapping, Optional

from dotenv.parser import parse_stream
from pydantic import BaseModel, ValidationError

from core.exceptions import ConfigParseError, ConfigValidationError
from models.agent import ActionSpaceConfig, EnvConfig, OlpcConfig, RlConfig
from models.cell import CellConfig
from models.experiment import ExperimentConfig
from models.radio import RadioConfig

logger = logging.getLogger(__name__)

SECTIONS: Dict[str, type] = {
    "cell": CellConfig,
    "radio": RadioConfig,
    "env": EnvConfig,
    "actions": ActionSpaceConfig,
    "olpc": OlpcConfig,
    "rl": RlConfig,
}
TOP_LEVEL_KEYS = ("algorithms", "d2d_counts", "seeds", "output_path", "model_dir")
LIST_KEYS = ("hidden_layers", "algorithms", "d2d_counts", "seeds")
KEY_ALIASES = {"algorithm": "algorithms"}

_KEY_SECTION = {key: section for section, model in SECTIONS.items() for key in model.model_fields}


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    if isinstance(value, (int, float)):
        return [value]
    return value


def _to_validation_error(exc: ValidationError) -> ConfigValidationError:
    error = exc.errors()[0]
    original = (error.get("ctx") or {}).get("error")
    if isinstance(original, ConfigValidationError):
        return original
    field = next((part for part in error.get("loc", ()) if isinstance(part, str)), "config")
    return ConfigValidationError(field, error.get("msg", str(exc)))


def _statement_line(binding) -> int:
    # a binding starts at the blank lines that precede its statement
    text = binding.original.string
    leading = text[: len(text) - len(text.lstrip())]
    return binding.original.line + leading.count("\n")


def parse_config_text(text: str, path: str = "<config>") -> Dict[str, str]:
    """Tokenise config text into raw key/value strings, reporting bad lines by number."""
    values: Dict[str, str] = {}
    for binding in parse_stream(io.StringIO(text)):
        line = _statement_line(binding)
        if binding.error:
            raise ConfigParseError(path, line, f"cannot parse '{binding.original.string.strip()}'")
        if binding.key is None:
            continue
        if binding.value is None:
            raise ConfigParseError(path, line, f"missing '=' after key '{binding.key}'")
        if binding.key in values:
            raise ConfigParseError(path, line, f"duplicate key '{binding.key}'")
        values[binding.key] = binding.value
    return values


def build_config(flat: Mapping[str, Any]) -> ExperimentConfig:
    """Validated ExperimentConfig from flat keys; unknown keys are rejected."""
    sections: Dict[str, Dict[str, Any]] = {name: {} for name in SECTIONS}
    top: Dict[str, Any] = {}
    for raw_key, value in flat.items():
        key = KEY_ALIASES.get(raw_key, raw_key)
        if key in LIST_KEYS:
            value = _split_list(value)
        if key in _KEY_SECTION:
            sections[_KEY_SECTION[key]][key] = value
        elif key in TOP_LEVEL_KEYS:
            top[key] = value
        else:
            raise ConfigValidationError(raw_key, "unknown configuration key")

    try:
        models = {name: SECTIONS[name](**fields) for name, fields in sections.items()}
        return ExperimentConfig(**models, **top)
    except ValidationError as exc:
        raise _to_validation_error(exc) from exc


def to_flat(config: ExperimentConfig) -> Dict[str, Any]:
    flat: Dict[str, Any] = {}
    for name in SECTIONS:
        section: BaseModel = getattr(config, name)
        flat.update(section.model_dump())
    for key in TOP_LEVEL_KEYS:
        flat[key] = getattr(config, key)
    return flat


def load_overrides(overrides: Mapping[str, Any], base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    """Apply flat-key overrides on top of `base` (reference defaults when omitted)."""
    flat = to_flat(base) if base is not None else {}
    for key, value in overrides.items():
        if value is not None:
            flat[KEY_ALIASES.get(key, key)] = value
    return build_config(flat)


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    config = build_config(parse_config_text(text, path))
    logger.info(f"✅ Loaded experiment config from {path}")
    return config
