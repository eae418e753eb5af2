"""Game model, lasso processes, value functions and random instances."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Mapping, Sequence

import numpy as np

PROB_TOL = 1e-12
BOUND_SLACK = 1e-12


class GameValidationError(ValueError):
    """Raised when a game description violates a model invariant.

    ``coords`` holds the offending (state, max-action, min-action) prefix.
    """

    def __init__(self, message: str, coords: tuple = ()):
        self.coords = tuple(coords)
        where = "/".join(str(c) for c in self.coords)
        super().__init__(f"{message} at {where}" if where else message)
        self.reason = message


@dataclass(frozen=True)
class GameInstance:
    """A finite two-player zero-sum Markov game with a running cost in [0, 1].

    ``cost`` maps each state to a number, or (generalized mode) each state to
    a nested ``{max_action: {min_action: number}}`` table.  ``transition``
    maps ``(state, a, b)`` to a ``{target: probability}`` dict with zero
    entries dropped.  Build instances through :func:`validate_game`.
    """

    name: str
    states: tuple[str, ...]
    cost: Mapping[str, Any]
    max_actions: Mapping[str, tuple[str, ...]]
    min_actions: Mapping[str, tuple[str, ...]]
    transition: Mapping[tuple[str, str, str], Mapping[str, float]]

    @property
    def action_cost(self) -> bool:
        return isinstance(self.cost[self.states[0]], Mapping)

    @property
    def deterministic(self) -> bool:
        return all(len(d) == 1 for d in self.transition.values())

    @cached_property
    def index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.states)}

    @cached_property
    def shape(self) -> tuple[int, int, int]:
        na = max(len(v) for v in self.max_actions.values())
        nb = max(len(v) for v in self.min_actions.values())
        return len(self.states), na, nb

    @cached_property
    def arrays(self) -> "GameArrays":
        return GameArrays.build(self)

    def stage_cost(self, state: str, a: str, b: str) -> float:
        c = self.cost[state]
        return float(c[a][b]) if isinstance(c, Mapping) else float(c)

    def to_dict(self) -> dict:
        actions = {
            s: {"max": list(self.max_actions[s]), "min": list(self.min_actions[s])}
            for s in self.states
        }
        transitions: dict = {}
        for s in self.states:
            transitions[s] = {
                a: {b: dict(self.transition[s, a, b]) for b in self.min_actions[s]}
                for a in self.max_actions[s]
            }
        if self.action_cost:
            cost = {
                s: {a: dict(self.cost[s][a]) for a in self.max_actions[s]}
                for s in self.states
            }
        else:
            cost = {s: self.cost[s] for s in self.states}
        return {
            "name": self.name,
            "states": list(self.states),
            "cost": cost,
            "actions": actions,
            "transitions": transitions,
        }

    def to_json(self) -> str:
        """Canonical serialization: declaration order, shortest float repr."""
        return json.dumps(self.to_dict(), indent=2)


@dataclass(frozen=True)
class GameArrays:
    """Dense, padded numpy view of a game used by the solvers.

    ``P[s, a, b, t]`` is the transition probability, ``G[s, a, b]`` the
    stage cost; padded action slots are masked out by ``amask``/``bmask``.
    """

    P: np.ndarray
    G: np.ndarray
    amask: np.ndarray
    bmask: np.ndarray

    @classmethod
    def build(cls, game: GameInstance) -> "GameArrays":
        S, A, B = game.shape
        P = np.zeros((S, A, B, S))
        G = np.zeros((S, A, B))
        amask = np.zeros((S, A), dtype=bool)
        bmask = np.zeros((S, B), dtype=bool)
        for i, s in enumerate(game.states):
            amask[i, : len(game.max_actions[s])] = True
            bmask[i, : len(game.min_actions[s])] = True
            for ia, a in enumerate(game.max_actions[s]):
                for ib, b in enumerate(game.min_actions[s]):
                    G[i, ia, ib] = game.stage_cost(s, a, b)
                    for t, p in game.transition[s, a, b].items():
                        P[i, ia, ib, game.index[t]] = p
        for arr in (P, G, amask, bmask):
            arr.setflags(write=False)
        return cls(P, G, amask, bmask)


@dataclass(frozen=True)
class LassoProcess:
    """An eventually periodic state trajectory: ``prefix`` then ``cycle`` forever."""

    prefix: tuple[str, ...]
    cycle: tuple[str, ...]

    def __init__(self, prefix: Sequence[str], cycle: Sequence[str]):
        if len(cycle) == 0:
            raise ValueError("cycle must be non-empty")
        object.__setattr__(self, "prefix", tuple(prefix))
        object.__setattr__(self, "cycle", tuple(cycle))

    def at(self, k: int) -> str:
        if k < len(self.prefix):
            return self.prefix[k]
        return self.cycle[(k - len(self.prefix)) % len(self.cycle)]

    def path(self, n: int) -> list[str]:
        return [self.at(k) for k in range(n)]

    def shifted(self, h: int) -> "LassoProcess":
        """The process ``t -> z(t + h)``."""
        if h <= len(self.prefix):
            return LassoProcess(self.prefix[h:], self.cycle)
        r = (h - len(self.prefix)) % len(self.cycle)
        return LassoProcess((), self.cycle[r:] + self.cycle[:r])

    @classmethod
    def from_path(cls, path: Sequence[str]) -> "LassoProcess":
        """Finite path continued by repeating its last state."""
        return cls(path[:-1], path[-1:])


def state_at(process: LassoProcess, t: float) -> str:
    """State of the piecewise-constant embedding at continuous time ``t``."""
    if not t >= 0:
        raise ValueError(f"time must be non-negative, got {t}")
    return process.at(math.floor(t))


@dataclass(frozen=True)
class ValueFunction:
    """Bounded real-valued map over a game's states."""

    states: tuple[str, ...]
    values: tuple[float, ...]
    bounds: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if len(self.states) != len(self.values):
            raise ValueError("states and values differ in length")
        lo, hi = self.bounds
        if lo > hi:
            raise ValueError(f"empty bounds {self.bounds}")
        slack = BOUND_SLACK * max(1.0, hi - lo)
        vals = []
        for s, v in zip(self.states, self.values):
            v = float(v)
            if not (lo - slack <= v <= hi + slack):
                raise ValueError(f"value {v!r} at {s} outside bounds [{lo}, {hi}]")
            vals.append(min(max(v, lo), hi))
        object.__setattr__(self, "values", tuple(vals))

    @classmethod
    def from_array(cls, states, arr, bounds=(0.0, 1.0)) -> "ValueFunction":
        return cls(tuple(states), tuple(float(x) for x in arr), tuple(bounds))

    @classmethod
    def constant(cls, states, c: float) -> "ValueFunction":
        lo, hi = min(0.0, c), max(1.0, c)
        return cls(tuple(states), (float(c),) * len(states), (lo, hi))

    @classmethod
    def from_mapping(cls, states, mapping: Mapping[str, float], bounds=None):
        vals = [float(mapping[s]) for s in states]
        if bounds is None:
            bounds = (min(0.0, *vals), max(1.0, *vals))
        return cls(tuple(states), tuple(vals), tuple(bounds))

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.values, dtype=float)
        arr.setflags(write=False)
        return arr

    def __getitem__(self, state: str) -> float:
        return self.values[self.states.index(state)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.states, self.values))

    def sup_distance(self, other: "ValueFunction") -> float:
        if self.states != other.states:
            raise ValueError("value functions live on different state sets")
        return float(np.max(np.abs(self.array - other.array)))

    def to_csv(self) -> str:
        lines = ["state,value"]
        lines += [f"{s},{format_float(v)}" for s, v in zip(self.states, self.values)]
        return "\n".join(lines) + "\n"


def format_float(x: float) -> str:
    """Shortest round-trip decimal representation."""
    return repr(float(x))


def _fail(msg, *coords):
    raise GameValidationError(msg, coords)


def _number(x, *coords) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        _fail(f"expected a number, got {x!r}", *coords)
    x = float(x)
    if not math.isfinite(x):
        _fail(f"non-finite number {x!r}", *coords)
    return x


def _check_cost(c: float, *coords) -> float:
    if not 0.0 <= c <= 1.0:
        _fail(f"cost out of range [0, 1]: {c!r}", *coords)
    return c


def validate_game(raw: Mapping[str, Any]) -> GameInstance:
    """Check a raw game description (the JSON schema) and build an instance."""
    if not isinstance(raw, Mapping):
        _fail("game description must be an object")
    for key in ("states", "cost", "actions", "transitions"):
        if key not in raw:
            _fail(f"missing field {key!r}")
    name = str(raw.get("name", "game"))
    states = tuple(str(s) for s in raw["states"])
    if not states:
        _fail("state set is empty")
    if len(set(states)) != len(states):
        _fail("duplicate state identifiers")
    known = set(states)

    actions = raw["actions"]
    max_actions, min_actions = {}, {}
    for s in states:
        if s not in actions:
            _fail("missing action sets", s)
        amax = tuple(str(a) for a in actions[s].get("max", ()))
        amin = tuple(str(b) for b in actions[s].get("min", ()))
        if not amax:
            _fail("empty action set for maximizer", s)
        if not amin:
            _fail("empty action set for minimizer", s)
        if len(set(amax)) != len(amax) or len(set(amin)) != len(amin):
            _fail("duplicate action names", s)
        max_actions[s], min_actions[s] = amax, amin

    rawcost = raw["cost"]
    generalized = any(isinstance(rawcost.get(s), Mapping) for s in states)
    cost: dict = {}
    for s in states:
        if s not in rawcost:
            _fail("missing cost", s)
        if generalized:
            table = rawcost[s]
            if not isinstance(table, Mapping):
                _fail("mixed state-only and action-dependent costs", s)
            cost[s] = {}
            for a in max_actions[s]:
                cost[s][a] = {}
                for b in min_actions[s]:
                    try:
                        c = table[a][b]
                    except (KeyError, TypeError):
                        _fail("missing cost entry", s, a, b)
                    cost[s][a][b] = _check_cost(_number(c, s, a, b), s, a, b)
        else:
            cost[s] = _check_cost(_number(rawcost[s], s), s)

    rawtr = raw["transitions"]
    transition = {}
    for s in states:
        for a in max_actions[s]:
            for b in min_actions[s]:
                try:
                    dist = rawtr[s][a][b]
                except (KeyError, TypeError):
                    _fail("missing transition entry", s, a, b)
                if not isinstance(dist, Mapping) or not dist:
                    _fail("transition must be a non-empty object", s, a, b)
                clean = {}
                for t, p in dist.items():
                    if t not in known:
                        _fail(f"unknown target state {t!r}", s, a, b)
                    p = _number(p, s, a, b, t)
                    if p < 0:
                        _fail(f"negative probability {p!r}", s, a, b, t)
                    if p > 0:
                        clean[t] = p
                total = math.fsum(clean.values())
                if abs(total - 1.0) > PROB_TOL:
                    _fail(f"distribution sums to {total:.12g}", s, a, b)
                transition[s, a, b] = {t: clean[t] for t in states if t in clean}
    return GameInstance(name, states, cost, max_actions, min_actions, transition)


def load_game(path) -> GameInstance:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GameValidationError(f"invalid JSON: {exc}") from exc
    return validate_game(raw)


# splitmix64 (Steele, Lea & Flood); constants from the reference implementation.
_MASK64 = (1 << 64) - 1


class SplitMix64:
    """64-bit splitmix generator; bit-reproducible across implementations."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Float in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def positive(self) -> float:
        """Float in (0, 1] from the top 53 bits."""
        return ((self.next_u64() >> 11) + 1) * 2.0**-53

    def below(self, n: int) -> int:
        return self.next_u64() % n


def random_game(
    sizes: tuple[int, int, int],
    seed: int,
    deterministic: bool = True,
    support: int | None = None,
    action_cost: bool = False,
) -> GameInstance:
    """Seeded random game with ``sizes = (states, max_actions, min_actions)``.

    Draw order: one cost per state (or per ``(s, a, b)`` when ``action_cost``),
    then, per ``(s, a, b)`` in declaration order, either one target index
    ``u64 % S`` (deterministic) or ``support`` distinct targets by partial
    Fisher-Yates followed by ``support`` weights in (0, 1], normalized.
    ``support=None`` means full support.
    """
    S, A, B = sizes
    if min(S, A, B) < 1:
        raise ValueError(f"all counts must be >= 1, got {sizes}")
    k = S if support is None else support
    if not deterministic and not 1 <= k <= S:
        raise ValueError(f"support must lie in [1, {S}], got {support}")
    rng = SplitMix64(seed)
    states = [f"s{i}" for i in range(S)]
    amax = [f"a{i}" for i in range(A)]
    amin = [f"b{j}" for j in range(B)]
    if action_cost:
        cost = {s: {a: {b: rng.uniform() for b in amin} for a in amax} for s in states}
    else:
        cost = {s: rng.uniform() for s in states}
    transitions: dict = {s: {a: {} for a in amax} for s in states}
    for s in states:
        for a in amax:
            for b in amin:
                if deterministic:
                    transitions[s][a][b] = {states[rng.below(S)]: 1.0}
                    continue
                pool = list(range(S))
                for i in range(k):
                    j = i + rng.below(S - i)
                    pool[i], pool[j] = pool[j], pool[i]
                targets = sorted(pool[:k])
                weights = [rng.positive() for _ in targets]
                total = math.fsum(weights)
                transitions[s][a][b] = {states[t]: w / total for t, w in zip(targets, weights)}
    kind = "det" if deterministic else f"stoch{k}"
    raw = {
        "name": f"random-{S}x{A}x{B}-{kind}-seed{seed}",
        "states": states,
        "cost": cost,
        "actions": {s: {"max": amax, "min": amin} for s in states},
        "transitions": transitions,
    }
    return validate_game(raw)
