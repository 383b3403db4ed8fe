"""Adaptive-agent market simulator: news, imitation and private signals driving bubbles and crashes."""

from .model import Agent, MarketState, StepRecord, TradeOrder
from .news import NewsSource, NewsSpec, ScriptedEntry, SequencingError
from .params import ClearingVariant, ConfigError, ModelParams, Topology
from .simulation import Simulation, TimeSeries, init_simulation

__all__ = [
    "Agent",
    "ClearingVariant",
    "ConfigError",
    "MarketState",
    "ModelParams",
    "NewsSource",
    "NewsSpec",
    "ScriptedEntry",
    "SequencingError",
    "Simulation",
    "StepRecord",
    "TimeSeries",
    "Topology",
    "TradeOrder",
    "init_simulation",
]
