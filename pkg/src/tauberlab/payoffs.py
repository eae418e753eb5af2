"""Exact Cesaro/Abel means and composite payoffs on lasso processes.

Everything here is evaluated on the piecewise-constant embedding
``z(k + t) = z(k)``, so integrals reduce to weighted stage sums and the
infinite Abel sum has a closed form on the cycle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

from .core import GameInstance, LassoProcess, ValueFunction


def discount_to_prob(lam: float) -> float:
    """Stopping probability ``1 - exp(-lam)`` matching a continuous discount rate."""
    if not lam > 0 or not math.isfinite(lam):
        raise ValueError(f"discount rate must be positive, got {lam}")
    return -math.expm1(-lam)


def prob_to_discount(mu: float) -> float:
    if not 0 < mu < 1:
        raise ValueError(f"probability must lie in (0, 1), got {mu}")
    return -math.log1p(-mu)


@dataclass(frozen=True)
class Cesaro:
    T: float

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"Cesaro horizon must be positive, got {self.T}")


@dataclass(frozen=True)
class Abel:
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"Abel rate must be positive, got {self.lam}")

    @property
    def mu(self) -> float:
        return discount_to_prob(self.lam)


@dataclass(frozen=True)
class DiscreteCesaro:
    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValueError(f"horizon must be a positive integer, got {self.n}")


@dataclass(frozen=True)
class DiscreteAbel:
    mu: float

    def __post_init__(self):
        if not 0 < self.mu < 1:
            raise ValueError(f"discount probability must lie in (0, 1), got {self.mu}")


@dataclass(frozen=True)
class Zeta:
    """Play ``h`` stages, then collect ``U`` weighted as a horizon-``T`` tail."""

    U: ValueFunction
    h: int
    T: float

    def __post_init__(self):
        if int(self.h) != self.h or self.h < 1:
            raise ValueError(f"h must be a positive integer, got {self.h}")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")


@dataclass(frozen=True)
class Xi:
    """Play ``h`` discounted stages, then collect ``exp(-lam h) U``."""

    U: ValueFunction
    h: int
    lam: float

    def __post_init__(self):
        if int(self.h) != self.h or self.h < 1:
            raise ValueError(f"h must be a positive integer, got {self.h}")
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")

    @property
    def mu(self) -> float:
        return discount_to_prob(self.lam)


PayoffSpec = Union[Cesaro, Abel, DiscreteCesaro, DiscreteAbel, Zeta, Xi]

# A stage-cost function along a process: state -> cost.
CostFn = Callable[[str], float]


def _cost_fn(game: GameInstance) -> CostFn:
    if game.action_cost:
        raise ValueError("process payoffs need a state-only running cost")
    return lambda s: game.cost[s]


def _stage_costs(game, process: LassoProcess, n: int) -> list[float]:
    g = _cost_fn(game)
    return [g(process.at(k)) for k in range(n)]


def cesaro_value(game: GameInstance, process: LassoProcess, T: float) -> float:
    """Time average of the running cost over ``[0, T]``."""
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    m = math.floor(T)
    frac = T - m
    g = _stage_costs(game, process, m + 1)
    return _clip(math.fsum(g[:m] + [frac * g[m]]) / T, g)


def discrete_cesaro(game: GameInstance, process: LassoProcess | Sequence[str], n: int) -> float:
    """Average of the first ``n`` stage costs of a lasso or an explicit path."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if isinstance(process, LassoProcess):
        g = _stage_costs(game, process, n)
    else:
        if len(process) < n:
            raise ValueError(f"path of length {len(process)} shorter than n={n}")
        gf = _cost_fn(game)
        g = [gf(s) for s in process[:n]]
    return _clip(math.fsum(g) / n, g)


def _geometric_lasso_sum(g_prefix, g_cycle, mu: float) -> float:
    """``sum_t (1 - mu)^t g(t)`` for an eventually periodic cost sequence, exactly.

    Powers go through ``log1p(-mu)`` so small ``mu`` keeps full precision.
    """
    lq = math.log1p(-mu)
    terms = [g * math.exp(k * lq) for k, g in enumerate(g_prefix)]
    L = len(g_cycle)
    head = math.exp(len(g_prefix) * lq)
    cyc = math.fsum(g * math.exp(k * lq) for k, g in enumerate(g_cycle))
    terms.append(head * cyc / -math.expm1(L * lq))
    return math.fsum(terms)


def _clip(v: float, costs) -> float:
    # a weighted mean stays within the range of the averaged costs
    return min(max(v, min(costs)), max(costs))


def discrete_abel(game: GameInstance, process: LassoProcess, mu: float) -> float:
    """``mu * sum_t (1 - mu)^t g(z(t))`` in closed form on the lasso."""
    if not 0 < mu < 1:
        raise ValueError(f"mu must lie in (0, 1), got {mu}")
    g = _cost_fn(game)
    gp = [g(s) for s in process.prefix]
    gc = [g(s) for s in process.cycle]
    return _clip(mu * _geometric_lasso_sum(gp, gc, mu), gp + gc)


def abel_value(game: GameInstance, process: LassoProcess, lam: float) -> float:
    """Continuous discounted mean, equal to the discrete one at ``1 - exp(-lam)``."""
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    return discrete_abel(game, process, discount_to_prob(lam))


def truncated_abel(game: GameInstance, process: LassoProcess, mu: float, N: int) -> tuple[float, float]:
    """Partial sum over ``t < N`` and the tail bound ``(1 - mu)^N``.

    Cross-check oracle for :func:`discrete_abel`; the true value lies in
    ``[partial, partial + bound]``.
    """
    g = _stage_costs(game, process, N)
    lq = math.log1p(-mu)
    partial = mu * math.fsum(c * math.exp(t * lq) for t, c in enumerate(g))
    return partial, math.exp(N * lq)


def composite_value(game: GameInstance, process: LassoProcess, spec: Zeta | Xi) -> float:
    """Evaluate a ``Zeta`` or ``Xi`` composite payoff on one process."""
    h = int(spec.h)
    g = _stage_costs(game, process, h)
    tail = spec.U[process.at(h)]
    if isinstance(spec, Zeta):
        T = spec.T
        return math.fsum(g) / (T + h) + T / (T + h) * tail
    if isinstance(spec, Xi):
        mu = spec.mu
        lq = math.log1p(-mu)
        return mu * math.fsum(c * math.exp(t * lq) for t, c in enumerate(g)) + math.exp(h * lq) * tail
    raise TypeError(f"not a composite payoff: {spec!r}")


def evaluate(game: GameInstance, process: LassoProcess, spec: PayoffSpec) -> float:
    """Dispatch any payoff variant on a single process."""
    if isinstance(spec, Cesaro):
        return cesaro_value(game, process, spec.T)
    if isinstance(spec, Abel):
        return abel_value(game, process, spec.lam)
    if isinstance(spec, DiscreteCesaro):
        return discrete_cesaro(game, process, spec.n)
    if isinstance(spec, DiscreteAbel):
        return discrete_abel(game, process, spec.mu)
    if isinstance(spec, (Zeta, Xi)):
        return composite_value(game, process, spec)
    raise TypeError(f"unknown payoff {spec!r}")
