"""Public news stream: seeded i.i.d. standard normal, optionally with scripted overrides."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SequencingError(RuntimeError):
    """A news value was requested out of order."""


@dataclass(frozen=True)
class ScriptedEntry:
    start_step: int
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.start_step < 1:
            raise ValueError(f"start_step must be >= 1, got {self.start_step}")

    @property
    def end_step(self) -> int:
        """Last step covered by this entry (inclusive)."""
        return self.start_step + len(self.values) - 1


@dataclass(frozen=True)
class NewsSpec:
    """Declarative news description as stored in run configs.

    ``scripted`` is empty for the pure gaussian stream.
    """

    scripted: tuple[ScriptedEntry, ...] = ()

    @property
    def kind(self) -> str:
        return "scripted" if self.scripted else "gaussian"

    def overrides(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for entry in self.scripted:
            for offset, v in enumerate(entry.values):
                out[entry.start_step + offset] = v
        return out


@dataclass
class NewsSource:
    """Emits n(t) for t = 1, 2, ... in order.

    The gaussian fallback is drawn at every step, including overridden
    ones, so scripted steps never shift the values at other steps.
    """

    seed: np.random.SeedSequence | int
    overrides: dict[int, float] = field(default_factory=dict)
    cursor: int = 1

    def __post_init__(self):
        self._rng = np.random.default_rng(self.seed)

    @classmethod
    def from_spec(cls, spec: NewsSpec, seed) -> "NewsSource":
        return cls(seed=seed, overrides=spec.overrides())

    def next_news(self, t: int) -> float:
        if t != self.cursor:
            raise SequencingError(f"news requested for step {t}, expected step {self.cursor}")
        return float(self.block(t, 1)[0])

    def block(self, t: int, count: int) -> np.ndarray:
        """Values for steps t .. t+count-1; advances the cursor."""
        if t != self.cursor:
            raise SequencingError(f"news requested for step {t}, expected step {self.cursor}")
        values = self._rng.standard_normal(count)
        for step, v in self.overrides.items():
            if t <= step < t + count:
                values[step - t] = v
        self.cursor += count
        return values
