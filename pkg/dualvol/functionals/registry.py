"""Functional registry for loading and building the counterexample gallery."""
import yaml
from pathlib import Path
from typing import Callable, Dict, List, Optional

from dualvol.config import DEFAULT_REGISTRY_PATH
from dualvol.core.sphere import SphereGrid
from dualvol.errors import InvalidParameterError
from dualvol.functionals.base import FunctionalDefinition
from dualvol.functionals.gallery import (
    DESIGNATED_FAILURES,
    intersection_volume,
    product_of_integrals,
    weighted_by_m,
)
from dualvol.functionals.implementations import BlackBoxFunctional
from dualvol.utils.logging import get_logger

Builder = Callable[..., BlackBoxFunctional]


def normalize_name(name: str) -> str:
    return name.strip().lower().replace("_", "-")


class FunctionalRegistry:
    """Registry of named functional builders and their YAML definitions."""

    def __init__(self, registry_path: str = DEFAULT_REGISTRY_PATH):
        """Initialize functional registry.

        Args:
            registry_path: Path to functional definitions
        """
        self.registry_path = Path(registry_path)
        self.builders: Dict[str, Builder] = {}
        self.definitions: Dict[str, FunctionalDefinition] = {}
        self.logger = get_logger("dmv.functionals.registry")

        self._load_definitions()
        self._register_builtin_builders()

    def _load_definitions(self):
        """Load functional definitions from YAML files."""
        if not self.registry_path.exists():
            self.logger.warning(f"Registry path not found: {self.registry_path}")
            return

        for yaml_file in sorted(self.registry_path.glob("*.yaml")):
            try:
                with open(yaml_file, 'r') as f:
                    data = yaml.safe_load(f)

                if data and "name" in data:
                    name = normalize_name(data["name"])
                    self.definitions[name] = FunctionalDefinition(
                        name=name,
                        description=data.get("description", ""),
                        violates=data.get("violates"),
                        holds=list(data.get("holds") or []),
                        params=data.get("params") or {},
                    )
                    self.logger.debug(f"Loaded functional definition: {name}")
            except Exception as e:
                self.logger.error(f"Failed to load {yaml_file}: {e}")

    def _register_builtin_builders(self):
        """Register the built-in gallery builders."""
        self.register("intersection-volume", intersection_volume)
        self.register("product-of-integrals", product_of_integrals)
        self.register("weighted-by-m", weighted_by_m)

    def register(self, name: str, builder: Builder):
        """Register a builder ``(dim, grid, **params) -> functional``."""
        self.builders[normalize_name(name)] = builder

    def build(
        self, name: str, dim: int, grid: Optional[SphereGrid] = None, **params
    ) -> BlackBoxFunctional:
        """Build a named functional.

        Raises:
            InvalidParameterError: If no builder has that name
        """
        key = normalize_name(name)
        builder = self.builders.get(key)
        if builder is None:
            raise InvalidParameterError(
                f"unknown gallery functional: {name} (known: {', '.join(self.list_names())})"
            )
        functional = builder(dim, grid, **params)
        definition = self.definitions.get(key)
        if definition and definition.description:
            functional.description = definition.description
        return functional

    def list_names(self) -> List[str]:
        return sorted(self.builders)

    def get_definition(self, name: str) -> Optional[FunctionalDefinition]:
        return self.definitions.get(normalize_name(name))

    def designated_failure(self, name: str) -> Optional[str]:
        """Property the named functional is expected to violate."""
        definition = self.get_definition(name)
        if definition and definition.violates:
            return definition.violates
        return DESIGNATED_FAILURES.get(normalize_name(name))


def gallery(
    name: str, grid: SphereGrid, registry: Optional[FunctionalRegistry] = None, **params
) -> BlackBoxFunctional:
    """Build a counterexample functional on ``grid``."""
    registry = registry or FunctionalRegistry()
    return registry.build(name, grid.dim, grid, **params)
