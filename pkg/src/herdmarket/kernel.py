"""Compiled inner loop of the simulation.

Agents are stored as parallel arrays; trust weights and cached neighbor
actions are stored per adjacency slot, aligned with ``SocialNetwork.indices``.
"""

import numpy as np
from numba import njit

# slots of the scalar market-state vector
T, LOG_PRICE, PRICE, LAST_RETURN, NEWS, PREV_NEWS, U, SIGMA_R, MEAN_R = range(9)
N_SCALARS = 9

# columns of the per-step output block
RECORD_COLUMNS = (
    "t",
    "price",
    "log_price",
    "return",
    "news",
    "u",
    "mean_k",
    "activity",
    "total_cash",
    "total_stocks",
)
DIAG_COLUMNS = ("min_cash", "min_stocks", "capped_buys")


@njit(cache=True)
def run_steps(
    news,
    eps,
    perms,
    c1,
    c2,
    c3,
    thr,
    cash,
    stocks,
    decision,
    indptr,
    indices,
    k,
    e_prev,
    e_cur,
    scal,
    g,
    lam,
    alpha,
    sigma_floor,
    settle_after,
    out,
    diag,
):
    n_agents = c1.shape[0]
    n_links = k.shape[0]
    direction = np.zeros(n_agents, np.int8)
    volume = np.zeros(n_agents)
    beta = 1.0 - alpha

    for b in range(news.shape[0]):
        n_t = news[b]
        u_prev = scal[U]
        p_prev = scal[PRICE]

        # opinions and orders, sequential in random order
        for idx in range(n_agents):
            i = perms[b, idx]
            social = 0.0
            for m in range(indptr[i], indptr[i + 1]):
                e = decision[indices[m]]
                e_cur[m] = e
                social += k[m] * e
            omega = c1[i] * social + c2[i] * u_prev * n_t + c3[i] * eps[b, i]
            d = 0
            v = 0.0
            if omega > thr[i]:
                d = 1
                v = g * cash[i] / p_prev
            elif omega < -thr[i]:
                d = -1
                v = g * stocks[i]
            if v <= 0.0:
                d = 0
                v = 0.0
            decision[i] = d
            direction[i] = d
            volume[i] = v

        # clearing
        excess = 0.0
        active = 0
        for i in range(n_agents):
            if direction[i] != 0:
                excess += direction[i] * volume[i]
                active += 1
        r = excess / (lam * n_agents)
        r_prev = scal[LAST_RETURN]
        scal[LOG_PRICE] += r
        scal[PRICE] = np.exp(scal[LOG_PRICE])
        scal[LAST_RETURN] = r

        # settlement
        p_settle = p_prev if settle_after else scal[PRICE]
        capped = 0
        for i in range(n_agents):
            if direction[i] > 0:
                cost = volume[i] * p_settle
                if cost > cash[i]:
                    stocks[i] += cash[i] / p_settle
                    cash[i] = 0.0
                    capped += 1
                else:
                    cash[i] -= cost
                    stocks[i] += volume[i]
            elif direction[i] < 0:
                cash[i] += volume[i] * p_settle
                stocks[i] -= volume[i]

        # adaptation
        scal[MEAN_R] = alpha * scal[MEAN_R] + beta * r_prev
        dev = r_prev - scal[MEAN_R]
        var = alpha * scal[SIGMA_R] * scal[SIGMA_R] + beta * dev * dev
        scal[SIGMA_R] = max(np.sqrt(var), sigma_floor)
        z = r / scal[SIGMA_R]
        scal[U] = alpha * u_prev + beta * scal[PREV_NEWS] * z
        k_sum = 0.0
        for m in range(n_links):
            k[m] = alpha * k[m] + beta * e_prev[m] * z
            k_sum += k[m]
            e_prev[m] = e_cur[m]
        scal[PREV_NEWS] = n_t
        scal[NEWS] = n_t
        scal[T] += 1.0

        total_cash = 0.0
        total_stocks = 0.0
        min_cash = np.inf
        min_stocks = np.inf
        for i in range(n_agents):
            total_cash += cash[i]
            total_stocks += stocks[i]
            if cash[i] < min_cash:
                min_cash = cash[i]
            if stocks[i] < min_stocks:
                min_stocks = stocks[i]

        out[b, 0] = scal[T]
        out[b, 1] = scal[PRICE]
        out[b, 2] = scal[LOG_PRICE]
        out[b, 3] = r
        out[b, 4] = n_t
        out[b, 5] = scal[U]
        out[b, 6] = k_sum / n_links if n_links > 0 else 0.0
        out[b, 7] = active / n_agents
        out[b, 8] = total_cash
        out[b, 9] = total_stocks
        diag[b, 0] = min_cash
        diag[b, 1] = min_stocks
        diag[b, 2] = capped
