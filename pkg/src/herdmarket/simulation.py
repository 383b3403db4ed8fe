"""Single-run simulation driver."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from . import kernel
from .model import Agent, MarketState, StepRecord
from .network import SocialNetwork, build_network
from .news import NewsSource, NewsSpec
from .params import ClearingVariant, ModelParams

# independent sub-streams of the root seed, in spawn order
STREAMS = ("traits", "thresholds", "news", "private", "permutation", "network")

BLOCK_STEPS = 256


def seed_streams(seed: int) -> dict[str, np.random.SeedSequence]:
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return dict(zip(STREAMS, children))


@dataclass
class TimeSeries:
    """Column-oriented record of a run, one row per step."""

    data: np.ndarray  # shape (n_steps, len(RECORD_COLUMNS))

    columns = kernel.RECORD_COLUMNS

    def __len__(self) -> int:
        return self.data.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    t = property(lambda self: self.column("t"))
    price = property(lambda self: self.column("price"))
    log_price = property(lambda self: self.column("log_price"))
    returns = property(lambda self: self.column("return"))
    news = property(lambda self: self.column("news"))
    u = property(lambda self: self.column("u"))
    mean_k = property(lambda self: self.column("mean_k"))
    activity = property(lambda self: self.column("activity"))
    total_cash = property(lambda self: self.column("total_cash"))
    total_stocks = property(lambda self: self.column("total_stocks"))

    def after(self, burn_in: int) -> "TimeSeries":
        """Drop steps t <= burn_in."""
        return TimeSeries(self.data[self.t > burn_in])

    def records(self) -> Iterator[StepRecord]:
        for row in self.data:
            yield _record_from_row(row)

    @classmethod
    def concat(cls, parts: list["TimeSeries"]) -> "TimeSeries":
        if not parts:
            return cls(np.empty((0, len(cls.columns))))
        return cls(np.concatenate([p.data for p in parts]))

    @classmethod
    def from_records(cls, records) -> "TimeSeries":
        rows = [
            (r.t, r.price, r.log_price, r.return_, r.news, r.u, r.mean_k, r.activity, r.total_cash, r.total_stocks)
            for r in records
        ]
        return cls(np.asarray(rows, dtype=float).reshape(-1, len(cls.columns)))


def _record_from_row(row) -> StepRecord:
    return StepRecord(
        int(row[0]), float(row[1]), float(row[2]), float(row[3]), float(row[4]),
        float(row[5]), float(row[6]), float(row[7]), float(row[8]), float(row[9]),
    )


def init_simulation(params: ModelParams) -> tuple[list[Agent], SocialNetwork, MarketState]:
    """Fresh agents, network and market state for ``params``."""
    sim = Simulation(params)
    return sim.agents(), sim.network, sim.market_state()


class Simulation:
    """One market, advanced step by step.

    Every random quantity comes from its own child of the root seed, so the
    traits of a run do not depend on its length and runs that differ only in
    C1, C2 or C3 see the same news, private signals and update orders.
    """

    def __init__(self, params: ModelParams, news: Optional[NewsSpec] = None):
        self.params = params
        streams = seed_streams(params.seed)
        n = params.n_agents

        traits = np.random.default_rng(streams["traits"]).random((3, n))
        self.c1 = params.c1_max * traits[0]
        self.c2 = params.c2_max * traits[1]
        self.c3 = params.c3_max * traits[2]
        self.thr = params.omega_max * np.random.default_rng(streams["thresholds"]).random(n)

        self.network = build_network(params, np.random.default_rng(streams["network"]))
        m = self.network.n_links

        self.cash = np.full(n, float(params.initial_cash))
        self.stocks = np.full(n, float(params.initial_stocks))
        self.decision = np.zeros(n, np.int8)
        self.k = np.zeros(m)
        self.e_prev = np.zeros(m, np.int8)
        self.e_cur = np.zeros(m, np.int8)

        self.scal = np.zeros(kernel.N_SCALARS)
        self.scal[kernel.LOG_PRICE] = math.log(params.initial_price)
        self.scal[kernel.PRICE] = params.initial_price
        self.scal[kernel.SIGMA_R] = params.sigma_init

        self.news_source = NewsSource.from_spec(news or NewsSpec(), streams["news"])
        self._private = np.random.default_rng(streams["private"])
        self._perm = np.random.default_rng(streams["permutation"])
        self.capped_buys = 0
        self.min_cash = math.inf
        self.min_stocks = math.inf

    @property
    def t(self) -> int:
        return int(self.scal[kernel.T])

    @property
    def price(self) -> float:
        return float(self.scal[kernel.PRICE])

    def draw(self, count: int):
        """Random inputs for the next ``count`` steps: news, private signals, visit orders."""
        n = self.params.n_agents
        news = self.news_source.block(self.t + 1, count)
        eps = self._private.standard_normal((count, n))
        perms = np.empty((count, n), np.int64)
        for b in range(count):
            perms[b] = self._perm.permutation(n)
        return news, eps, perms

    def advance(self, news: np.ndarray, eps: np.ndarray, perms: np.ndarray) -> TimeSeries:
        """Run ``len(news)`` steps on explicitly supplied random inputs."""
        count = len(news)
        out = np.empty((count, len(kernel.RECORD_COLUMNS)))
        diag = np.empty((count, len(kernel.DIAG_COLUMNS)))
        p = self.params
        kernel.run_steps(
            np.ascontiguousarray(news, dtype=np.float64),
            np.ascontiguousarray(eps, dtype=np.float64),
            np.ascontiguousarray(perms, dtype=np.int64),
            self.c1, self.c2, self.c3, self.thr,
            self.cash, self.stocks, self.decision,
            self.network.indptr, self.network.indices,
            self.k, self.e_prev, self.e_cur, self.scal,
            p.g, p.lambda_, p.alpha, p.sigma_floor,
            p.clearing_variant is ClearingVariant.PRICE_AFTER_TRADE,
            out, diag,
        )
        if count:
            self.min_cash = min(self.min_cash, float(diag[:, 0].min()))
            self.min_stocks = min(self.min_stocks, float(diag[:, 1].min()))
            self.capped_buys += int(diag[:, 2].sum())
        return TimeSeries(out)

    def step(self) -> StepRecord:
        return next(self.advance(*self.draw(1)).records())

    def run(self, n_steps: Optional[int] = None) -> TimeSeries:
        remaining = self.params.n_steps if n_steps is None else n_steps
        parts = []
        while remaining > 0:
            count = min(BLOCK_STEPS, remaining)
            parts.append(self.advance(*self.draw(count)))
            remaining -= count
        return TimeSeries.concat(parts)

    # -- object views, used for inspection and by the reference step --

    def agents(self) -> list[Agent]:
        out = []
        for i in range(self.params.n_agents):
            lo, hi = self.network.indptr[i], self.network.indptr[i + 1]
            nbrs = self.network.indices[lo:hi].tolist()
            out.append(
                Agent(
                    c1=float(self.c1[i]),
                    c2=float(self.c2[i]),
                    c3=float(self.c3[i]),
                    omega_threshold=float(self.thr[i]),
                    cash=float(self.cash[i]),
                    stocks=float(self.stocks[i]),
                    neighbors=nbrs,
                    k=dict(zip(nbrs, self.k[lo:hi].tolist())),
                    last_decision=int(self.decision[i]),
                    perceived_neighbor_actions=dict(zip(nbrs, self.e_prev[lo:hi].tolist())),
                )
            )
        return out

    def market_state(self) -> MarketState:
        s = self.scal
        return MarketState(
            t=int(s[kernel.T]),
            log_price=float(s[kernel.LOG_PRICE]),
            price=float(s[kernel.PRICE]),
            last_return=float(s[kernel.LAST_RETURN]),
            news=float(s[kernel.NEWS]),
            prev_news=float(s[kernel.PREV_NEWS]),
            u=float(s[kernel.U]),
            sigma_r=float(s[kernel.SIGMA_R]),
            mean_r=float(s[kernel.MEAN_R]),
        )

    def load(self, agents: list[Agent], state: MarketState) -> None:
        """Overwrite the dynamic state from object views (traits included)."""
        for i, a in enumerate(agents):
            lo = self.network.indptr[i]
            self.c1[i], self.c2[i], self.c3[i] = a.c1, a.c2, a.c3
            self.thr[i] = a.omega_threshold
            self.cash[i], self.stocks[i] = a.cash, a.stocks
            self.decision[i] = a.last_decision
            for off, j in enumerate(a.neighbors):
                self.k[lo + off] = a.k[j]
                self.e_prev[lo + off] = a.perceived_neighbor_actions[j]
        s = self.scal
        s[kernel.T] = state.t
        s[kernel.LOG_PRICE] = state.log_price
        s[kernel.PRICE] = state.price
        s[kernel.LAST_RETURN] = state.last_return
        s[kernel.NEWS] = state.news
        s[kernel.PREV_NEWS] = state.prev_news
        s[kernel.U] = state.u
        s[kernel.SIGMA_R] = state.sigma_r
        s[kernel.MEAN_R] = state.mean_r

    def wealth(self) -> np.ndarray:
        return self.cash + self.stocks * self.price
