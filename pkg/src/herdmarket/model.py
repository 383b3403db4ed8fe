"""Agent-level state and the per-agent model equations.

These scalar functions are the readable form of the model. The vectorized
kernel in :mod:`herdmarket.kernel` implements the same arithmetic for speed;
:mod:`herdmarket.reference` strings these functions together into a slow
step that the kernel is checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .params import ClearingVariant


@dataclass
class Agent:
    c1: float
    c2: float
    c3: float
    omega_threshold: float
    cash: float
    stocks: float
    neighbors: list[int]
    k: dict[int, float] = field(default_factory=dict)
    last_decision: int = 0
    # E_i[s_j] values used in the most recent opinion, keyed by neighbor
    perceived_neighbor_actions: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        for j in self.neighbors:
            self.k.setdefault(j, 0.0)
            self.perceived_neighbor_actions.setdefault(j, 0)

    def wealth(self, price: float) -> float:
        return self.cash + self.stocks * price


@dataclass
class MarketState:
    t: int = 0
    log_price: float = 0.0
    price: float = 1.0
    last_return: float = 0.0
    news: float = 0.0
    prev_news: float = 0.0
    u: float = 0.0
    sigma_r: float = 0.1
    mean_r: float = 0.0

    @classmethod
    def initial(cls, price: float, sigma_r: float) -> "MarketState":
        return cls(log_price=math.log(price), price=price, sigma_r=sigma_r)


@dataclass(frozen=True)
class TradeOrder:
    agent_index: int
    direction: int
    volume: float


@dataclass(frozen=True)
class StepRecord:
    t: int
    price: float
    log_price: float
    return_: float
    news: float
    u: float
    mean_k: float
    activity: float
    total_cash: float
    total_stocks: float


def form_opinion(
    agent: Agent,
    perceived_actions: Sequence[int],
    u_prev: float,
    news: float,
    eps: float,
) -> float:
    """Weighted sum of neighbor actions, news and private signal.

    ``perceived_actions`` is aligned with ``agent.neighbors``; it is cached on
    the agent for the next adaptation step.
    """
    if len(perceived_actions) != len(agent.neighbors):
        raise ValueError(
            f"expected {len(agent.neighbors)} perceived actions, got {len(perceived_actions)}"
        )
    social = 0.0
    for j, e in zip(agent.neighbors, perceived_actions):
        social += agent.k[j] * e
    agent.perceived_neighbor_actions = {j: int(e) for j, e in zip(agent.neighbors, perceived_actions)}
    return agent.c1 * social + agent.c2 * u_prev * news + agent.c3 * eps


def decide_trade(
    agent: Agent, omega: float, prev_price: float, g: float, agent_index: int = 0
) -> Optional[TradeOrder]:
    """Buy a fraction g of cash or sell a fraction g of stocks, if conviction clears the threshold."""
    if prev_price <= 0:
        raise ValueError("prev_price must be positive")
    direction, volume = 0, 0.0
    if omega > agent.omega_threshold:
        direction, volume = 1, g * agent.cash / prev_price
    elif omega < -agent.omega_threshold:
        direction, volume = -1, g * agent.stocks
    if volume <= 0.0:
        agent.last_decision = 0
        return None
    agent.last_decision = direction
    return TradeOrder(agent_index, direction, volume)


def clear_price(orders: Sequence[TradeOrder], state: MarketState, n_agents: int, lambda_: float):
    """Linear-impact clearing: log-return proportional to net signed volume.

    Orders are aggregated in agent-index order so the sum does not depend on
    the order in which they were submitted.
    """
    excess = 0.0
    for o in sorted(orders, key=lambda o: o.agent_index):
        excess += o.direction * o.volume
    r = excess / (lambda_ * n_agents)
    state.log_price += r
    state.price = math.exp(state.log_price)
    state.last_return = r
    return r, state.price


def settle_trades(
    orders: Sequence[TradeOrder],
    agents: Sequence[Agent],
    new_price: float,
    prev_price: float,
    clearing_variant: ClearingVariant,
) -> int:
    """Execute orders against the market maker. Returns the number of capped buys."""
    if new_price <= 0:
        raise ValueError("new_price must be positive")
    price = new_price if clearing_variant is ClearingVariant.PRICE_BEFORE_TRADE else prev_price
    capped = 0
    for o in orders:
        a = agents[o.agent_index]
        if o.direction > 0:
            cost = o.volume * price
            if cost > a.cash:
                a.stocks += a.cash / price
                a.cash = 0.0
                capped += 1
            else:
                a.cash -= cost
                a.stocks += o.volume
        else:
            a.cash += o.volume * price
            a.stocks -= o.volume
    return capped


def update_volatility_estimate(state: MarketState, r_prev: float, alpha: float, sigma_floor: float):
    """Advance the running mean and volatility of returns with r(t-1)."""
    state.mean_r = alpha * state.mean_r + (1.0 - alpha) * r_prev
    dev = r_prev - state.mean_r
    var = alpha * state.sigma_r * state.sigma_r + (1.0 - alpha) * dev * dev
    state.sigma_r = max(math.sqrt(var), sigma_floor)
    return state.mean_r, state.sigma_r


def update_news_weight(u_prev: float, news_prev: float, r_now: float, sigma_r: float, alpha: float) -> float:
    z = r_now / sigma_r
    return alpha * u_prev + (1.0 - alpha) * news_prev * z


def update_imitation_weights(
    agent: Agent, cached_prev: dict[int, int], r_now: float, sigma_r: float, alpha: float
) -> dict[int, float]:
    z = r_now / sigma_r
    for j in agent.neighbors:
        agent.k[j] = alpha * agent.k[j] + (1.0 - alpha) * cached_prev[j] * z
    return agent.k
