"""Model parameters and their validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from enum import Enum


class ConfigError(ValueError):
    """Invalid configuration. ``field`` names the offending parameter."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class ClearingVariant(str, Enum):
    PRICE_BEFORE_TRADE = "price-before-trade"
    PRICE_AFTER_TRADE = "price-after-trade"


class Topology(str, Enum):
    LATTICE4 = "lattice4"
    RANDOM = "random"
    COMPLETE = "complete"


MAX_COMPLETE_AGENTS = 1024
MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class ModelParams:
    """All scalar parameters of one simulation.

    Defaults are the baseline market: 2500 agents on a 50x50 torus,
    C1=C2=C3=1, threshold bound 2, memory 0.95, depth 0.25, trade fraction 2%.
    """

    n_agents: int = 2500
    c1_max: float = 1.0
    c2_max: float = 1.0
    c3_max: float = 1.0
    omega_max: float = 2.0
    alpha: float = 0.95
    lambda_: float = 0.25
    g: float = 0.02
    initial_cash: float = 1.0
    initial_stocks: float = 1.0
    initial_price: float = 1.0
    clearing_variant: ClearingVariant = ClearingVariant.PRICE_BEFORE_TRADE
    topology: Topology = Topology.LATTICE4
    mean_degree: float = 4.0
    seed: int = 0
    n_steps: int = 10_000
    sigma_floor: float = 1e-8
    sigma_init: float = 0.1
    burn_in: int = 200

    def __post_init__(self):
        # accept plain strings for the enums (config files, replace())
        try:
            object.__setattr__(self, "clearing_variant", ClearingVariant(self.clearing_variant))
        except ValueError:
            raise ConfigError(
                "clearing_variant",
                f"must be one of {[v.value for v in ClearingVariant]}, got {self.clearing_variant!r}",
            ) from None
        try:
            object.__setattr__(self, "topology", Topology(self.topology))
        except ValueError:
            raise ConfigError(
                "topology", f"must be one of {[v.value for v in Topology]}, got {self.topology!r}"
            ) from None
        self.validate()

    @property
    def lattice_side(self) -> int:
        return math.isqrt(self.n_agents)

    def validate(self) -> None:
        _require_int("n_agents", self.n_agents, minimum=1)
        _require_int("seed", self.seed, minimum=0)
        if self.seed > MAX_SEED:
            raise ConfigError("seed", "must fit in 64 unsigned bits")
        _require_int("n_steps", self.n_steps, minimum=1)
        _require_int("burn_in", self.burn_in, minimum=0)
        for name in ("c1_max", "c2_max", "c3_max"):
            _require_real(name, getattr(self, name), low=0.0)
        _require_real("omega_max", self.omega_max, low=0.0, strict=True)
        _require_real("lambda_", self.lambda_, low=0.0, strict=True)
        _require_real("initial_cash", self.initial_cash, low=0.0, strict=True)
        _require_real("initial_stocks", self.initial_stocks, low=0.0, strict=True)
        _require_real("initial_price", self.initial_price, low=0.0, strict=True)
        _require_real("sigma_floor", self.sigma_floor, low=0.0, strict=True)
        _require_real("sigma_init", self.sigma_init, low=0.0, strict=True)
        _require_open_unit("alpha", self.alpha)
        _require_open_unit("g", self.g)

        if self.topology is Topology.LATTICE4:
            side = self.lattice_side
            if side * side != self.n_agents:
                raise ConfigError(
                    "n_agents", f"lattice4 topology needs a perfect square, got {self.n_agents}"
                )
            if side < 3:
                raise ConfigError("n_agents", "lattice4 topology needs a side of at least 3")
        elif self.topology is Topology.COMPLETE:
            if self.n_agents > MAX_COMPLETE_AGENTS:
                raise ConfigError(
                    "n_agents",
                    f"complete topology is limited to {MAX_COMPLETE_AGENTS} agents, got {self.n_agents}",
                )
            if self.n_agents < 2:
                raise ConfigError("n_agents", "complete topology needs at least 2 agents")
        else:
            _require_real("mean_degree", self.mean_degree, low=0.0, strict=True)
            if self.mean_degree > self.n_agents - 1:
                raise ConfigError("mean_degree", "cannot exceed n_agents - 1")

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = value.value if isinstance(value, Enum) else value
        return out


PARAM_NAMES = tuple(f.name for f in fields(ModelParams))


def _require_int(name, value, minimum):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(name, f"must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(name, f"must be >= {minimum}, got {value}")


def _require_real(name, value, low, strict=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, f"must be a real number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(name, f"must be finite, got {value}")
    if value < low or (strict and value == low):
        op = ">" if strict else ">="
        raise ConfigError(name, f"must be {op} {low}, got {value}")


def _require_open_unit(name, value):
    _require_real(name, value, low=0.0, strict=True)
    if value >= 1.0:
        raise ConfigError(name, f"must lie in (0, 1), got {value}")
