"""Protocol parameters threaded through every analysis."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
import os
from typing import Any

from ..const import (
    DEFAULT_P_F_MAX,
    DEFAULT_SEED,
    ENV_SEED,
    MIN_LEAVES,
    STAR_GEOMETRY,
    VARIANT_P1,
    VARIANT_P2,
)
from ..exceptions import InvalidArgumentError
from .config import ArmGeometry, Conventions

STAR_ARM = ArmGeometry(name=STAR_GEOMETRY, chain_length=1, cherries_per_chain_qubit=0)


class Variant(str, Enum):
    """Connection protocol variant."""

    P1 = VARIANT_P1
    P2 = VARIANT_P2

    @classmethod
    def parse(cls, value: str | Variant) -> Variant:
        """Parse 'p1'/'p2' (case-insensitive)."""
        try:
            return cls(str(getattr(value, "value", value)).lower())
        except ValueError as err:
            raise InvalidArgumentError(f"unknown variant {value!r}; expected p1 or p2") from err


def default_seed() -> int:
    """Master seed from the environment, or the built-in default."""
    raw = os.environ.get(ENV_SEED)
    if raw is None or not raw.strip():
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError as err:
        raise InvalidArgumentError(f"{ENV_SEED} must be an integer, got {raw!r}") from err


def check_probability(name: str, value: float, *, allow_one: bool = False) -> None:
    """Raise InvalidArgumentError unless 0 <= value < 1 (or <= 1)."""
    upper_ok = value <= 1 if allow_one else value < 1
    if not (0 <= value and upper_ok):
        bracket = "[0, 1]" if allow_one else "[0, 1)"
        raise InvalidArgumentError(f"{name} must be in {bracket}, got {value}")


@dataclass(frozen=True)
class ProtocolParams:
    """Configuration of one protocol run.

    `geometry` shapes the arms of P2 stars; P1 arms are always a bare leaf.
    """

    variant: Variant = Variant.P1
    p_s: float = 0.9
    p_u: float = 0.0
    p_P: float = 0.0
    p_M: float = 0.0
    L: int = 7
    p_f_target: float = DEFAULT_P_F_MAX
    seed: int = field(default_factory=default_seed)
    geometry: ArmGeometry = field(default_factory=ArmGeometry)
    conventions: Conventions = field(default_factory=Conventions)

    def __post_init__(self) -> None:
        """Validate ranges."""
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        check_probability("p_s", self.p_s, allow_one=True)
        for name in ("p_u", "p_P", "p_M"):
            check_probability(name, getattr(self, name))
        if not 0 < self.p_f_target < 1:
            raise InvalidArgumentError(f"p_f_target must be in (0, 1), got {self.p_f_target}")
        if self.L < MIN_LEAVES:
            raise InvalidArgumentError(f"L must be >= {MIN_LEAVES}, got {self.L}")

    @property
    def arm(self) -> ArmGeometry:
        """Geometry actually used for the arms of this variant."""
        return STAR_ARM if self.variant is Variant.P1 else self.geometry

    def with_updates(self, **changes: Any) -> ProtocolParams:
        """Return a copy with some fields replaced."""
        return replace(self, **changes)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ProtocolParams:
        """Create parameters from a plain dictionary."""
        geometry = data.get("geometry", {})
        conventions = data.get("conventions", {})
        try:
            return cls(
                variant=Variant.parse(data.get("variant", VARIANT_P1)),
                p_s=float(data.get("p_s", 0.9)),
                p_u=float(data.get("p_u", 0.0)),
                p_P=float(data.get("p_P", 0.0)),
                p_M=float(data.get("p_M", 0.0)),
                L=int(data.get("L", 7)),
                p_f_target=float(data.get("p_f_target", DEFAULT_P_F_MAX)),
                seed=int(data["seed"]) if "seed" in data else default_seed(),
                geometry=geometry if isinstance(geometry, ArmGeometry) else ArmGeometry.from_dict(geometry),
                conventions=conventions
                if isinstance(conventions, Conventions)
                else Conventions.from_dict(conventions),
            )
        except (TypeError, ValueError) as err:
            if isinstance(err, InvalidArgumentError):
                raise
            raise InvalidArgumentError(f"invalid protocol parameters: {err}") from err

    def as_dict(self) -> dict[str, Any]:
        """Plain-dict form for provenance blocks."""
        return {
            "variant": self.variant.value,
            "p_s": self.p_s,
            "p_u": self.p_u,
            "p_P": self.p_P,
            "p_M": self.p_M,
            "L": self.L,
            "p_f_target": self.p_f_target,
            "seed": self.seed,
            "geometry": self.arm.as_dict(),
            "conventions": self.conventions.as_dict(),
        }
