"""Slow, object-based step: a direct transcription of the model equations.

Used as an oracle for the compiled kernel. Nothing here is cached across
steps except what the model itself carries (decisions, trust weights).
"""

from __future__ import annotations

import copy
import math
from typing import Sequence

from .model import (
    Agent,
    MarketState,
    StepRecord,
    TradeOrder,
    clear_price,
    decide_trade,
    form_opinion,
    settle_trades,
    update_imitation_weights,
    update_news_weight,
    update_volatility_estimate,
)
from .params import ModelParams


def reference_step(
    agents: list[Agent],
    state: MarketState,
    params: ModelParams,
    news: float,
    eps: Sequence[float],
    order: Sequence[int],
) -> tuple[list[Agent], MarketState, StepRecord]:
    """Advance copies of ``agents`` and ``state`` by one step on the given draws."""
    agents = copy.deepcopy(agents)
    state = copy.deepcopy(state)
    prev_perceived = [dict(a.perceived_neighbor_actions) for a in agents]
    prev_price = state.price
    r_prev = state.last_return
    u_prev = state.u

    orders: list[TradeOrder] = []
    for i in order:
        a = agents[i]
        perceived = [agents[j].last_decision for j in a.neighbors]
        omega = form_opinion(a, perceived, u_prev, news, eps[i])
        o = decide_trade(a, omega, prev_price, params.g, agent_index=i)
        if o is not None:
            orders.append(o)

    r, new_price = clear_price(orders, state, params.n_agents, params.lambda_)
    settle_trades(orders, agents, new_price, prev_price, params.clearing_variant)

    update_volatility_estimate(state, r_prev, params.alpha, params.sigma_floor)
    state.u = update_news_weight(u_prev, state.prev_news, r, state.sigma_r, params.alpha)
    for a, cached in zip(agents, prev_perceived):
        update_imitation_weights(a, cached, r, state.sigma_r, params.alpha)
    state.prev_news = news
    state.news = news
    state.t += 1

    weights = [a.k[j] for a in agents for j in a.neighbors]
    k_sum = 0.0
    for w in weights:
        k_sum += w
    total_cash = 0.0
    total_stocks = 0.0
    for a in agents:
        total_cash += a.cash
        total_stocks += a.stocks
    record = StepRecord(
        t=state.t,
        price=state.price,
        log_price=state.log_price,
        return_=r,
        news=news,
        u=state.u,
        mean_k=k_sum / len(weights) if weights else 0.0,
        activity=len(orders) / params.n_agents,
        total_cash=total_cash,
        total_stocks=total_stocks,
    )
    assert math.isfinite(record.mean_k)
    return agents, state, record
