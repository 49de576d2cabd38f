"""Base functional interface."""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from dualvol.core.sphere import SphereGrid
from dualvol.core.starset import StarSet
from dualvol.errors import ArityError, DimensionError


@dataclass
class FunctionalDefinition:
    """Registry entry for a named functional."""
    name: str
    description: str
    violates: Optional[str] = None
    holds: List[str] = field(default_factory=list)
    params: Dict[str, Any] = field(default_factory=dict)


class Functional(ABC):
    """Base class for functionals ``F(L₁,…,Lₙ)`` on n-tuples of star sets."""

    def __init__(
        self,
        name: str,
        dim: int,
        grid: Optional[SphereGrid] = None,
        description: str = "",
        serial: bool = False
    ):
        """Initialize functional.

        Args:
            name: Functional name
            dim: Ambient dimension n (also the arity)
            grid: Grid the functional lives on, if any
            description: Human-readable description
            serial: True when evaluation must not run concurrently
        """
        if grid is not None and grid.dim != dim:
            raise DimensionError(f"functional of dimension {dim} on grid {grid.grid_id}")
        self.name = name
        self.dim = dim
        self.grid = grid
        self.description = description
        self.serial = serial

    @abstractmethod
    def evaluate(self, bodies: Sequence[StarSet]) -> float:
        """Evaluate on exactly ``dim`` star sets.

        Returns:
            Functional value
        """
        pass

    def __call__(self, *bodies: StarSet) -> float:
        return self.evaluate(list(bodies))

    def check_arity(self, bodies: Sequence[StarSet]) -> List[StarSet]:
        bodies = list(bodies)
        if len(bodies) != self.dim:
            raise ArityError(f"{self.name} takes {self.dim} arguments, got {len(bodies)}")
        for body in bodies:
            if body.dim != self.dim:
                raise DimensionError(f"{self.name} got a star set of dimension {body.dim}")
        return bodies

    def describe(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "dim": self.dim,
            "grid": self.grid.grid_id if self.grid is not None else None,
        }

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r}, dim={self.dim})"
