"""Geometry preset manager."""
from __future__ import annotations

import json
import logging
import os

from ..exceptions import InvalidArgumentError
from ..models.config import ArmGeometry

_LOGGER = logging.getLogger(__name__)

GEOMETRY_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), "geometries")
_KNOWN_KEYS = {"_comment", "name", "chain_length", "cherries_per_chain_qubit"}


class ConfigManager:
    """Load and serve arm-geometry presets."""

    _instance = None
    _geometries: dict[str, ArmGeometry] = {}

    def __new__(cls):
        """Singleton pattern."""
        if cls._instance is None:
            cls._instance = super(ConfigManager, cls).__new__(cls)
        return cls._instance

    def load_geometries(self, config_dir: str = GEOMETRY_DIR) -> None:
        """Load all presets from a directory."""
        if not os.path.exists(config_dir):
            _LOGGER.error("Geometry directory not found: %s", config_dir)
            return

        for filename in sorted(os.listdir(config_dir)):
            if not filename.endswith(".json"):
                continue
            try:
                file_path = os.path.join(config_dir, filename)
                with open(file_path, "r", encoding="utf-8") as f:
                    data = json.load(f)
                unknown = set(data) - _KNOWN_KEYS
                if unknown:
                    _LOGGER.warning("Ignoring unknown keys in %s: %s", filename, sorted(unknown))
                key = filename[:-5]
                self._geometries[key] = ArmGeometry.from_dict({"name": key, **data})
                _LOGGER.debug("Loaded geometry preset: %s", key)
            except (OSError, ValueError) as e:
                _LOGGER.error("Failed to load geometry %s: %s", filename, e)

        if self._geometries:
            _LOGGER.debug("Loaded %d geometry presets: %s", len(self._geometries), sorted(self._geometries))
        else:
            _LOGGER.error("No geometry presets loaded from %s", config_dir)

    def get_geometry(self, name: str) -> ArmGeometry:
        """Return a preset by name, loading the bundled presets on first use."""
        if not self._geometries:
            self.load_geometries()
        if name in self._geometries:
            return self._geometries[name]
        raise InvalidArgumentError(
            f"unknown geometry preset {name!r}; available: {sorted(self._geometries)}"
        )

    @property
    def names(self) -> list[str]:
        """Names of the loaded presets."""
        if not self._geometries:
            self.load_geometries()
        return sorted(self._geometries)


# Global instance
config_manager = ConfigManager()
