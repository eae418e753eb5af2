"""Payoff -> value-function maps, explicit sup-inf oracles and axiom checks.

A value map must satisfy two axioms: ``V[A c + B] = A V[c] + B`` for
``A >= 0``, and monotonicity under pointwise payoff dominance.  Three maps
ship here: the dynamic-programming map, an enumerative map that evaluates
the sup-inf over explicit rule sets, and a control map where the minimizer
has a single rule.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from . import payoffs as po
from .core import GameInstance, LassoProcess, ValueFunction
from .solver import (
    PureMaximin,
    StageMode,
    discounted_values,
    fractional_horizon_totals,
    horizon_totals,
    propagate_discount,
    propagate_horizon,
)


class UnsupportedPayoff(ValueError):
    pass


class DominanceError(ValueError):
    pass


@dataclass(frozen=True)
class Affine:
    """The payoff ``A * base + B`` with ``A >= 0``."""

    base: object
    A: float
    B: float

    def __post_init__(self):
        if self.A < 0:
            raise ValueError(f"affine scale must be non-negative, got {self.A}")


@dataclass(frozen=True)
class Recosted:
    """``base`` evaluated with a different state-only running cost."""

    base: object
    cost: tuple[tuple[str, float], ...]

    @classmethod
    def of(cls, base, cost: Mapping[str, float]) -> "Recosted":
        return cls(base, tuple(cost.items()))


Payoff = Union[po.PayoffSpec, Affine, Recosted]


def affine(c, A: float, B: float) -> Affine:
    """``A c + B`` with nested affine wrappers collapsed."""
    if A < 0:
        raise ValueError(f"affine scale must be non-negative, got {A}")
    if isinstance(c, Affine):
        return Affine(c.base, A * c.A, A * c.B + B)
    return Affine(c, A, B)


def _unwrap(payoff):
    """Split a payoff into (spec, A, B, cost override)."""
    A, B, cost = 1.0, 0.0, None
    if isinstance(payoff, Affine):
        A, B, payoff = payoff.A, payoff.B, payoff.base
    if isinstance(payoff, Recosted):
        cost, payoff = dict(payoff.cost), payoff.base
    if isinstance(payoff, (Affine, Recosted)):
        raise UnsupportedPayoff("wrap payoffs as Affine(Recosted(spec)) at most")
    return payoff, A, B, cost


def _recost(game: GameInstance, cost) -> GameInstance:
    if cost is None:
        return game
    if game.action_cost:
        raise UnsupportedPayoff("cost override needs a state-only game")
    return replace(game, cost={s: float(cost[s]) for s in game.states})


def _spec_range(spec) -> tuple[float, float]:
    if isinstance(spec, (po.Zeta, po.Xi)):
        lo, hi = spec.U.bounds
        return min(0.0, lo), max(1.0, hi)
    return 0.0, 1.0


def payoff_bounds(payoff) -> tuple[float, float]:
    spec, A, B, cost = _unwrap(payoff)
    lo, hi = _spec_range(spec)
    if cost is not None:
        lo, hi = min(lo, *cost.values()), max(hi, *cost.values())
    return A * lo + B, A * hi + B


def payoff_function(game: GameInstance, payoff) -> Callable[[LassoProcess], float]:
    """The payoff as a plain function of a process."""
    if callable(payoff) and not isinstance(payoff, (Affine, Recosted)):
        return payoff
    spec, A, B, cost = _unwrap(payoff)
    g = _recost(game, cost)
    return lambda z: A * po.evaluate(g, z, spec) + B


class GameValueMap:
    """Base class: ``evaluate(game, payoff) -> ValueFunction`` over an accepted class."""

    name = "abstract"

    def accepts(self, game: GameInstance, payoff) -> bool:
        raise NotImplementedError

    def _evaluate(self, game: GameInstance, payoff) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, game: GameInstance, payoff) -> ValueFunction:
        if not self.accepts(game, payoff):
            raise UnsupportedPayoff(f"{self.name} map does not accept {payoff!r}")
        vals = self._evaluate(game, payoff)
        return ValueFunction.from_array(game.states, vals, payoff_bounds(payoff))

    def __call__(self, game, payoff) -> ValueFunction:
        return self.evaluate(game, payoff)


class DPMap(GameValueMap):
    """Values through the one-step recursions; affine payoffs transform the stage data."""

    name = "dp"

    def __init__(self, mode: StageMode = PureMaximin(), tol: float = 1e-14):
        self.mode = mode
        self.tol = tol

    def accepts(self, game, payoff) -> bool:
        try:
            spec, _, _, cost = _unwrap(payoff)
        except UnsupportedPayoff:
            return False
        if cost is not None and game.action_cost:
            return False
        if isinstance(spec, (po.Zeta, po.Xi)):
            return spec.U.states == game.states
        return isinstance(spec, (po.Cesaro, po.Abel, po.DiscreteCesaro, po.DiscreteAbel))

    def _evaluate(self, game, payoff) -> np.ndarray:
        spec, A, B, cost = _unwrap(payoff)
        game = _recost(game, cost)
        aff = (A, B)
        if isinstance(spec, po.DiscreteCesaro):
            return horizon_totals(game, spec.n, self.mode, aff)[-1] / spec.n
        if isinstance(spec, po.Cesaro):
            return fractional_horizon_totals(game, spec.T, self.mode, aff) / spec.T
        if isinstance(spec, (po.DiscreteAbel, po.Abel)):
            lo, hi = payoff_bounds(payoff)
            vf, _ = discounted_values(game, spec.mu, self.tol, self.mode, cost=aff, bounds=(lo, hi))
            return vf.array
        if isinstance(spec, po.Zeta):
            return propagate_horizon(game, A * spec.U.array + B, spec.T, spec.h, self.mode, aff)
        if isinstance(spec, po.Xi):
            return propagate_discount(game, A * spec.U.array + B, spec.mu, spec.h, self.mode, aff)
        raise UnsupportedPayoff(repr(spec))


@dataclass(frozen=True)
class ExplicitGameForm:
    """Sup-inf data at one initial state.

    ``outcomes[l, m]`` is a tuple of ``(probability, LassoProcess)`` pairs; a
    single pair with probability 1 is a deterministic outcome.
    """

    initial: str
    rules_max: tuple
    rules_min: tuple
    outcomes: Mapping[tuple, tuple[tuple[float, LassoProcess], ...]]

    def __post_init__(self):
        if not self.rules_max or not self.rules_min:
            raise ValueError("rule sets must be non-empty")
        for l in self.rules_max:
            for m in self.rules_min:
                if (l, m) not in self.outcomes:
                    raise ValueError(f"missing outcome for rules {l!r}, {m!r}")
                dist = self.outcomes[l, m]
                if not dist:
                    raise ValueError(f"empty outcome for rules {l!r}, {m!r}")
                for p, z in dist:
                    if p < 0:
                        raise ValueError(f"negative probability for {l!r}, {m!r}")
                    if z.at(0) != self.initial:
                        raise ValueError(f"outcome of {l!r}, {m!r} does not start at {self.initial}")
                if abs(math.fsum(p for p, _ in dist) - 1.0) > 1e-12:
                    raise ValueError(f"outcome distribution of {l!r}, {m!r} does not sum to 1")

    @property
    def deterministic(self) -> bool:
        return all(len(d) == 1 for d in self.outcomes.values())

    @classmethod
    def from_dict(cls, raw: Mapping) -> "ExplicitGameForm":
        def lasso(d):
            return LassoProcess(d.get("prefix", []), d["cycle"])

        outcomes = {}
        for l, row in raw["outcomes"].items():
            for m, out in row.items():
                if isinstance(out, Mapping):
                    outcomes[l, m] = ((1.0, lasso(out)),)
                else:
                    outcomes[l, m] = tuple((float(o["p"]), lasso(o)) for o in out)
        return cls(raw["initial"], tuple(raw["max_rules"]), tuple(raw["min_rules"]), outcomes)

    @classmethod
    def load(cls, path) -> "ExplicitGameForm":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class LowerValue:
    value: float
    rule_max: object
    rule_min: object


def _sup_inf(form: ExplicitGameForm, score) -> LowerValue:
    best = None
    for l in form.rules_max:
        worst = None
        for m in form.rules_min:
            v = score(form.outcomes[l, m])
            if worst is None or v < worst[0]:
                worst = (v, m)
        if best is None or worst[0] > best.value:
            best = LowerValue(worst[0], l, worst[1])
    return best


def lower_value(form: ExplicitGameForm, payoff: Callable[[LassoProcess], float]) -> LowerValue:
    """``max_l min_m payoff(z[l, m])`` over deterministic outcomes."""
    if not form.deterministic:
        raise ValueError("lower_value needs deterministic outcomes; use expected_lower_value")
    return _sup_inf(form, lambda dist: float(payoff(dist[0][1])))


def expected_lower_value(form: ExplicitGameForm, payoff: Callable[[LassoProcess], float]) -> LowerValue:
    """``max_l min_m E[payoff]`` with exact finite expectations."""
    return _sup_inf(form, lambda dist: math.fsum(p * float(payoff(z)) for p, z in dist))


class TablePayoff:
    """A payoff given by an explicit table over processes."""

    def __init__(self, table: Mapping[LassoProcess, float]):
        self.table = dict(table)

    def __call__(self, z: LassoProcess) -> float:
        try:
            return self.table[z]
        except KeyError:
            raise UnsupportedPayoff(f"payoff not defined on {z!r}") from None


def _reachable(game: GameInstance, start: str, horizon: int) -> list[list[str]]:
    layers = [[start]]
    for _ in range(horizon - 1):
        nxt = set()
        for s in layers[-1]:
            for a in game.max_actions[s]:
                for b in game.min_actions[s]:
                    nxt.update(game.transition[s, a, b])
        layers.append([s for s in game.states if s in nxt])
    return layers


def _path_distribution(game, start, horizon, act_max, act_min):
    """Distribution over length-(horizon+1) paths under the given rule lookups."""
    dist = {(start,): 1.0}
    for t in range(horizon):
        nxt: dict = {}
        for path, p in dist.items():
            s = path[-1]
            a = act_max(t, s)
            b = act_min(t, s, a)
            for u, q in game.transition[s, a, b].items():
                key = path + (u,)
                nxt[key] = nxt.get(key, 0.0) + p * q
        dist = nxt
    return tuple((p, LassoProcess.from_path(path)) for path, p in dist.items())


def markov_form(game: GameInstance, start: str, horizon: int, singleton_min: bool = False, cap: int = 1 << 18):
    """Explicit form whose rules are horizon-step Markov policies.

    Maximizer rules assign an action to each reachable (time, state); the
    minimizer's rules assign a response to each (time, state, maximizer
    action).  Outcomes are paths of ``horizon + 1`` states continued by
    repeating the last one.
    """
    layers = _reachable(game, start, horizon)
    slots_max = [(t, s) for t, layer in enumerate(layers) for s in layer]
    slots_min = [(t, s, a) for t, s in slots_max for a in game.max_actions[s]]
    n_max = math.prod(len(game.max_actions[s]) for _, s in slots_max)
    n_min = 1 if singleton_min else math.prod(len(game.min_actions[s]) for _, s, _ in slots_min)
    if n_max * n_min > cap:
        raise UnsupportedPayoff(f"explicit form needs {n_max * n_min} outcomes, cap is {cap}")
    rules_max = tuple(itertools.product(*[game.max_actions[s] for _, s in slots_max]))
    if singleton_min:
        rules_min = (tuple(game.min_actions[s][0] for _, s, _ in slots_min),)
    else:
        rules_min = tuple(itertools.product(*[game.min_actions[s] for _, s, _ in slots_min]))
    imax = {k: i for i, k in enumerate(slots_max)}
    imin = {k: i for i, k in enumerate(slots_min)}
    outcomes = {}
    for l in rules_max:
        for m in rules_min:
            outcomes[l, m] = _path_distribution(
                game, start, horizon,
                lambda t, s: l[imax[t, s]],
                lambda t, s, a: m[imin[t, s, a]],
            )
    return ExplicitGameForm(start, rules_max, rules_min, outcomes)


def stationary_form(game: GameInstance, start: str, singleton_min: bool = False, cap: int = 1 << 18):
    """Explicit form over stationary policies of a deterministic game; outcomes are exact lassos."""
    if not game.deterministic:
        raise UnsupportedPayoff("stationary forms need deterministic transitions")
    states = game.states
    slots_min = [(s, a) for s in states for a in game.max_actions[s]]
    n_max = math.prod(len(game.max_actions[s]) for s in states)
    n_min = 1 if singleton_min else math.prod(len(game.min_actions[s]) for s, _ in slots_min)
    if n_max * n_min > cap:
        raise UnsupportedPayoff(f"explicit form needs {n_max * n_min} outcomes, cap is {cap}")
    rules_max = tuple(itertools.product(*[game.max_actions[s] for s in states]))
    if singleton_min:
        rules_min = (tuple(game.min_actions[s][0] for s, _ in slots_min),)
    else:
        rules_min = tuple(itertools.product(*[game.min_actions[s] for s, _ in slots_min]))
    imin = {k: i for i, k in enumerate(slots_min)}
    outcomes = {}
    for l in rules_max:
        pol = dict(zip(states, l))
        for m in rules_min:
            path, seen = [], {}
            s = start
            while s not in seen:
                seen[s] = len(path)
                path.append(s)
                a = pol[s]
                (s,) = game.transition[s, a, m[imin[s, a]]]
            k = seen[s]
            outcomes[l, m] = ((1.0, LassoProcess(path[:k], path[k:])),)
    return ExplicitGameForm(start, rules_max, rules_min, outcomes)


def _needed_horizon(spec) -> int | None:
    """Number of transitions a payoff looks at, or None for infinite-horizon payoffs."""
    if isinstance(spec, po.DiscreteCesaro):
        return spec.n - 1
    if isinstance(spec, po.Cesaro):
        return math.floor(spec.T) if spec.T != math.floor(spec.T) else int(spec.T) - 1
    if isinstance(spec, (po.Zeta, po.Xi)):
        return spec.h
    return None


class EnumerativeMap(GameValueMap):
    """Sup-inf over explicit rule sets, evaluated outcome by outcome.

    Finite-horizon payoffs use Markov forms of length ``horizon``;
    infinite-horizon payoffs use stationary forms (deterministic games only).
    """

    name = "enumerative"
    singleton_min = False

    def __init__(self, horizon: int = 2, cap: int = 1 << 18):
        self.horizon = horizon
        self.cap = cap
        self._forms: dict = {}

    def accepts(self, game, payoff) -> bool:
        if callable(payoff) and not isinstance(payoff, (Affine, Recosted)):
            return False
        try:
            spec, _, _, cost = _unwrap(payoff)
        except UnsupportedPayoff:
            return False
        if game.action_cost:
            return False
        if isinstance(spec, (po.Zeta, po.Xi)) and spec.U.states != game.states:
            return False
        need = _needed_horizon(spec)
        if need is None:
            return isinstance(spec, (po.Abel, po.DiscreteAbel)) and game.deterministic
        return need <= self.horizon

    def _form(self, game, start, stationary):
        key = (id(game), start, stationary)
        hit = self._forms.get(key)
        if hit is None or hit[0] is not game:
            if stationary:
                form = stationary_form(game, start, self.singleton_min, self.cap)
            else:
                form = markov_form(game, start, self.horizon, self.singleton_min, self.cap)
            hit = (game, form)
            self._forms[key] = hit
        return hit[1]

    def _evaluate(self, game, payoff) -> np.ndarray:
        spec, _, _, _ = _unwrap(payoff)
        stationary = _needed_horizon(spec) is None
        fn = payoff_function(game, payoff)
        out = []
        for s in game.states:
            form = self._form(game, s, stationary)
            out.append(expected_lower_value(form, fn).value)
        return np.array(out)


class ControlMap(EnumerativeMap):
    """Enumerative map with a single minimizer rule: a pure maximization problem."""

    name = "control"
    singleton_min = True


def check_affine(vmap: GameValueMap, game: GameInstance, payoff, A: float, B: float) -> float:
    """``max_s |V[A c + B](s) - (A V[c](s) + B)|``."""
    if A < 0:
        raise ValueError(f"affine check needs A >= 0, got {A}")
    base = vmap.evaluate(game, payoff).array
    image = vmap.evaluate(game, affine(payoff, A, B)).array
    return float(np.max(np.abs(image - (A * base + B))))


def dominates(c1, c2) -> bool:
    """Structural certificate that ``c1 <= c2`` on every process.

    Recognized: equal payoffs; the same affine shape with a larger shift;
    the same composite with a pointwise larger tail ``U``; cost overrides that
    are pointwise larger (with non-negative scale).
    """
    if c1 == c2:
        return True
    s1, A1, B1, k1 = _unwrap(c1)
    s2, A2, B2, k2 = _unwrap(c2)
    if A1 != A2 or B1 > B2:
        return False
    if type(s1) is not type(s2):
        return False
    if isinstance(s1, (po.Zeta, po.Xi)):
        same = {k: v for k, v in vars(s1).items() if k != "U"} == {
            k: v for k, v in vars(s2).items() if k != "U"
        }
        if not same or s1.U.states != s2.U.states:
            return False
        if not np.all(s1.U.array <= s2.U.array):
            return False
    elif s1 != s2:
        return False
    if (k1 is None) != (k2 is None):
        return False
    if k1 is not None and any(k1[s] > k2[s] for s in k1):
        return False
    return True


def check_monotone(vmap: GameValueMap, game: GameInstance, c1, c2, certificate: bool | None = None) -> float:
    """``max_s (V[c1](s) - V[c2](s))`` for a certified pair ``c1 <= c2``."""
    ok = dominates(c1, c2) if certificate is None else certificate
    if not ok:
        raise DominanceError("dominance certificate missing for the payoff pair")
    return float(np.max(vmap.evaluate(game, c1).array - vmap.evaluate(game, c2).array))


def monotone_extension(table: Sequence[tuple[np.ndarray, np.ndarray]], target: np.ndarray) -> np.ndarray:
    """Extend a value map known on finitely many payoffs to ``target``.

    ``table`` holds ``(payoff vector over a fixed process list, value vector
    over states)`` pairs; the extension is the pointwise sup of values of the
    tabulated payoffs dominated by ``target``.
    """
    target = np.asarray(target, dtype=float)
    vals = [np.asarray(v, dtype=float) for c, v in table if np.all(np.asarray(c) <= target)]
    if not vals:
        raise DominanceError("no tabulated payoff lies below the target")
    return np.max(vals, axis=0)
