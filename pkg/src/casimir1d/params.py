"""Parameter bundles shared by all modules.

Units follow the usual convention c = k_B = 1; hbar is kept explicit and
defaults to one.  The coupling enters every energy formula only through
g = e^2/m, so that is what gets stored.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional


@dataclass(frozen=True)
class OscillatorParams:
    """Identical oscillators: intrinsic frequency, damping and coupling g = e^2/m."""

    omega: float = 1.0
    gamma: float = 0.0
    g: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        for name in ("omega", "gamma", "g"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")

    @property
    def e2(self) -> float:
        """Squared charge e^2 = g * m."""
        return self.g * self.mass

    def replace(self, **kw) -> "OscillatorParams":
        d = dict(omega=self.omega, gamma=self.gamma, g=self.g, mass=self.mass)
        d.update(kw)
        return OscillatorParams(**d)


@dataclass(frozen=True)
class Geometry:
    """Oscillators at -b/2 and +b/2, optionally inside a Dirichlet box [-L/2, L/2]."""

    b: float = 1.0
    L: Optional[float] = None

    def __post_init__(self):
        if not (self.b > 0 and math.isfinite(self.b)):
            raise ValueError(f"separation b must be positive, got {self.b}")
        if self.L is not None and not (self.L > self.b and math.isfinite(self.L)):
            raise ValueError(f"box length L must exceed b={self.b}, got {self.L}")

    @property
    def in_box(self) -> bool:
        return self.L is not None

    @property
    def positions(self) -> tuple[float, float]:
        return (-0.5 * self.b, 0.5 * self.b)


@dataclass(frozen=True)
class ThermalParams:
    """Temperature and hbar.  T = 0 is allowed and flags the vacuum."""

    T: float = 1.0
    hbar: float = 1.0
    zero: bool = field(init=False)

    def __post_init__(self):
        if not (self.T >= 0 and math.isfinite(self.T)):
            raise ValueError(f"temperature must be finite and >= 0, got {self.T}")
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        object.__setattr__(self, "zero", self.T == 0)

    @property
    def beta(self) -> float:
        return math.inf if self.zero else 1.0 / self.T

    def at(self, T: float) -> "ThermalParams":
        return ThermalParams(T=T, hbar=self.hbar)
