"""Configuration management for the copositivity checker."""

import copy
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from .certification import KrawczykConfig
from .tracker import TrackerConfig


class Config:
    """Manages numeric defaults and input limits, persisted as YAML."""

    DEFAULT_CONFIG_DIR = Path.home() / ".signomial-copositivity"
    DEFAULT_CONFIG_FILE = DEFAULT_CONFIG_DIR / "config.yaml"

    DEFAULT_CONFIG = {
        "tracker": {
            "initial_step": 0.05,
            "min_step": 1e-10,
            "max_step": 0.2,
            "newton_tol": 1e-12,
            "newton_max_iters": 8,
            "max_steps": 10000,
            "step_expand": 1.5,
            "step_shrink": 0.5,
        },
        "certification": {
            "initial_radius": 1e-8,
            "max_attempts": 6,
            "grow": 4.0,
            "shrink": 0.25,
            "refine_iters": 20,
        },
        "fallback": {
            "n_starts": 200,
            "seed": 0,
            "cluster_tol": 1e-6,
        },
        "limits": {
            "max_vars": 8,
            "max_terms": 40,
        },
        "heights": {
            "default": 1,
        },
        "batch": {
            "jobs": 1,
        },
    }

    def __init__(self, config_path: Optional[Path] = None):
        """Initialize configuration."""
        self.config_path = config_path or self.DEFAULT_CONFIG_FILE
        self.config_dir = self.config_path.parent
        self._config = None

    def load(self) -> Dict[str, Any]:
        """Load configuration from file, create with defaults if not exists."""
        if not self.config_path.exists():
            self.config_dir.mkdir(parents=True, exist_ok=True)
            self.save(copy.deepcopy(self.DEFAULT_CONFIG))
        else:
            with open(self.config_path) as f:
                self._config = yaml.safe_load(f) or {}
            # Merge with defaults for any missing keys, one level into each section
            for key, value in self.DEFAULT_CONFIG.items():
                if key not in self._config:
                    self._config[key] = copy.deepcopy(value)
                elif isinstance(value, dict) and isinstance(self._config[key], dict):
                    for sub_key, sub_value in value.items():
                        self._config[key].setdefault(sub_key, sub_value)

        return self._config

    def save(self, config: Dict[str, Any]) -> None:
        """Save configuration to file."""
        self.config_dir.mkdir(parents=True, exist_ok=True)
        with open(self.config_path, "w") as f:
            yaml.dump(config, f, default_flow_style=False, sort_keys=False)
        self._config = config

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value. Dotted keys address nested sections."""
        if self._config is None:
            self.load()
        node: Any = self._config
        for part in key.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def set(self, key: str, value: Any) -> None:
        """Set configuration value and save."""
        if self._config is None:
            self.load()
        *parents, leaf = key.split(".")
        node = self._config
        for part in parents:
            node = node.setdefault(part, {})
        node[leaf] = value
        self.save(self._config)

    def tracker_config(self, **overrides: Any) -> TrackerConfig:
        """Build a validated TrackerConfig; keyword overrides win over the file."""
        values = dict(self.get("tracker", {}))
        values.update({k: v for k, v in overrides.items() if v is not None})
        cfg = TrackerConfig(**values)
        cfg.validate()
        return cfg

    def krawczyk_config(self) -> KrawczykConfig:
        """Get certification settings."""
        return KrawczykConfig(**self.get("certification", {}))

    def get_fallback_settings(self) -> Dict[str, Any]:
        """Get multistart fallback settings."""
        return self.get("fallback", {})

    def get_max_vars(self) -> int:
        """Get the guardrail on the number of variables."""
        return int(self.get("limits.max_vars", 8))

    def get_max_terms(self) -> int:
        """Get the guardrail on the number of terms."""
        return int(self.get("limits.max_terms", 40))

    def get_default_height(self) -> int:
        """Get the height assigned to negative terms when --h is absent."""
        return int(self.get("heights.default", 1))

    def get_jobs(self) -> int:
        """Get the default worker count for batch mode."""
        return int(self.get("batch.jobs", 1))
