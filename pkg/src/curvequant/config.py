"""Session truncation configuration shared by all modules."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigInvalid


@dataclass(frozen=True)
class Truncation:
    """Single source of truth for precision semantics.

    nh     -- inclusive hbar truncation order
    window -- mode window bound M per axis (exponents in [-M, M])
    degree -- tensor degree cap d for twist/shuffle gradings
    """

    nh: int = 2
    window: int = 8
    degree: int = 2

    def validate(self):
        if self.nh < 1:
            raise ConfigInvalid("nh must be >= 1")
        if self.window < 2 * self.nh + 2:
            raise ConfigInvalid(f"window M={self.window} below heuristic 2*nh+2={2 * self.nh + 2}")
        if self.degree > self.nh:
            raise ConfigInvalid("degree cap d must satisfy d <= nh")
        return self


@dataclass
class SessionConfig:
    """Parsed CLI configuration."""

    instance: str = "trig"
    truncation: Truncation = field(default_factory=Truncation)
    tau_shift: list = field(default_factory=list)  # antisymmetric R (x) R shift, optional
    sigma: str | None = None                       # descriptor for the sigma variant
    finite_m: int = 2
    discrete: dict = field(default_factory=dict)
    out_dir: str | None = None

    def validate(self):
        self.truncation.validate()
        if self.instance not in ("rational", "trig", "finite"):
            raise ConfigInvalid(f"unknown instance {self.instance!r}")
        return self
