"""Engine configuration with flags > environment > config file precedence.

The config file is ``pageguide.toml``, looked up in the working directory
first and then under the user config dir (``~/.config/pageguide/``).
Environment variables: PAGEGUIDE_API_KEY, PAGEGUIDE_BASE_URL,
PAGEGUIDE_MODEL.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

try:
    import tomllib  # Python 3.11+
except ModuleNotFoundError:  # pragma: no cover - version-dependent import
    import tomli as tomllib

from .gateway import DEFAULT_BASE_URL, DEFAULT_MODEL

CONFIG_FILENAME = "pageguide.toml"

ENV_VARS = {
    "api_key": "PAGEGUIDE_API_KEY",
    "base_url": "PAGEGUIDE_BASE_URL",
    "model": "PAGEGUIDE_MODEL",
}

DEFAULT_MAX_BODY_BYTES = 8 * 1024 * 1024


@dataclass
class Config:
    model: str = DEFAULT_MODEL
    base_url: str = DEFAULT_BASE_URL
    api_key: Optional[str] = None
    replay: Optional[Path] = None
    mode: str = "passthrough"  # record | replay | passthrough
    elem_clip: int = 120
    fuzzy_min: float = 0.8
    max_steps: int = 25
    max_body_bytes: int = DEFAULT_MAX_BODY_BYTES
    timeout: float = 60.0

    def validate(self) -> "Config":
        if self.mode not in ("record", "replay", "passthrough"):
            raise ValueError(f"mode {self.mode!r} unknown")
        if self.mode in ("record", "replay") and self.replay is None:
            raise ValueError(f"{self.mode} mode requires a replay/transcript path")
        if self.elem_clip < 1:
            raise ValueError("elem_clip must be >= 1")
        if not 0.0 < self.fuzzy_min <= 1.0:
            raise ValueError("fuzzy_min must be in (0, 1]")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.max_body_bytes < 1:
            raise ValueError("max_body_bytes must be >= 1")
        return self


def _config_file_candidates(cwd: Path) -> list[Path]:
    home_dir = Path(os.environ.get("XDG_CONFIG_HOME",
                                   Path.home() / ".config"))
    return [cwd / CONFIG_FILENAME, home_dir / "pageguide" / CONFIG_FILENAME]


def _load_file(path: Optional[Path], cwd: Path) -> dict:
    candidates = [path] if path else _config_file_candidates(cwd)
    for candidate in candidates:
        if candidate and candidate.is_file():
            with candidate.open("rb") as fh:
                return tomllib.load(fh)
    return {}


def load_config(flags: Optional[dict] = None,
                config_file: Optional[Path] = None,
                env: Optional[dict] = None,
                cwd: Optional[Path] = None) -> Config:
    """Resolve configuration: flags beat environment beat file beat defaults.

    ``flags`` entries set to None are treated as not-given.
    """
    env = os.environ if env is None else env
    cwd = Path.cwd() if cwd is None else cwd
    settings: dict = {}

    file_values = _load_file(config_file, cwd)
    known = {f.name for f in fields(Config)}
    settings.update({k: v for k, v in file_values.items() if k in known})

    for field_name, var in ENV_VARS.items():
        value = env.get(var)
        if value:
            settings[field_name] = value

    for key, value in (flags or {}).items():
        if value is not None and key in known:
            settings[key] = value

    if "replay" in settings and settings["replay"] is not None:
        settings["replay"] = Path(settings["replay"])
    return Config(**settings).validate()
