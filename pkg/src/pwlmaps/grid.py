"""Parameter axes and two-parameter grids shared by the cycle solver and the scanners."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Axis:
    """``n`` equally spaced parameter values from ``lo`` to ``hi`` (cell centres)."""

    name: str
    lo: float
    hi: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ConfigError(f"axis {self.name!r} needs at least 2 cells, got {self.n}")
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or not self.hi > self.lo:
            raise ConfigError(f"axis {self.name!r} has an empty range [{self.lo}, {self.hi}]")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.n - 1)

    def index_of(self, v: float) -> int:
        """Nearest cell index to the value ``v`` (clipped to the axis)."""
        return int(np.clip(round((v - self.lo) / self.step), 0, self.n - 1))

    @classmethod
    def parse(cls, name: str, text: str) -> Axis:
        """Parse ``min:max:n``."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"axis {name!r}: expected min:max:n, got {text!r}")
        try:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"axis {name!r}: cannot parse {text!r}") from exc
        return cls(name, lo, hi, n)

    def spec(self) -> str:
        return f"{self.lo!r}:{self.hi!r}:{self.n}"


@dataclass(frozen=True)
class ParamGrid:
    """A grid over two named parameters; everything else comes from ``fixed``.

    Cell (i, j) sits at axis1.values[i], axis2.values[j].
    """

    axis1: Axis
    axis2: Axis
    fixed: dict

    @property
    def shape(self) -> tuple[int, int]:
        return (self.axis1.n, self.axis2.n)

    def values_at(self, i: int, j: int) -> dict:
        out = dict(self.fixed)
        out[self.axis1.name] = float(self.axis1.values[i])
        out[self.axis2.name] = float(self.axis2.values[j])
        return out

    def cells(self):
        for i in range(self.axis1.n):
            for j in range(self.axis2.n):
                yield i, j
