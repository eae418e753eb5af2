"""Dynamic-programming values of finite Markov games.

Horizon values are built from the one-step recursion on totals
``S_n = n * V_n``; discounted values are fixed points of the one-step
discounted operator.  Longer-step dynamic programming identities are
therefore consequences that the test-suite checks, not assumptions.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .core import GameInstance, ValueFunction, format_float
from .lp import pure_bounds, solve_matrix_game
from .payoffs import discount_to_prob


@dataclass(frozen=True)
class PureMaximin:
    """Maximizer moves first, minimizer answers: max over rows of the row minimum."""

    name = "pure"


@dataclass(frozen=True)
class MixedValue:
    """Mixed-strategy matrix-game value."""

    lp_tol: float = 1e-9
    name = "mixed"

    def __post_init__(self):
        if not self.lp_tol > 0:
            raise ValueError("lp_tol must be positive")


StageMode = Union[PureMaximin, MixedValue]


def mode_from_name(name: str, lp_tol: float = 1e-9) -> StageMode:
    if name == "pure":
        return PureMaximin()
    if name == "mixed":
        return MixedValue(lp_tol)
    raise ValueError(f"unknown stage mode {name!r}")


class ConvergenceError(RuntimeError):
    pass


class OracleCapExceeded(RuntimeError):
    def __init__(self, required: int, cap: int):
        self.required, self.cap = required, cap
        super().__init__(f"enumeration needs {required} policies, cap is {cap}")


@dataclass(frozen=True)
class StageResult:
    value: float
    row: int | None = None
    col: int | None = None
    row_strategy: np.ndarray | None = None
    col_strategy: np.ndarray | None = None


def stage_value(table, mode: StageMode = PureMaximin()) -> StageResult:
    """Value of one stage table indexed (max-action, min-action)."""
    M = np.asarray(table, dtype=float)
    if M.ndim != 2 or M.size == 0:
        raise ValueError("stage table must be a non-empty matrix")
    if isinstance(mode, PureMaximin):
        rowmin = M.min(axis=1)
        i = int(np.argmax(rowmin))
        return StageResult(float(rowmin[i]), i, int(np.argmin(M[i])))
    sol = solve_matrix_game(M, mode.lp_tol)
    return StageResult(sol.value, row_strategy=sol.row_strategy, col_strategy=sol.col_strategy)


def _stage_all(game: GameInstance, Q: np.ndarray, mode: StageMode):
    """Stage values for every state at once; ``Q`` has shape (S, A, B)."""
    arr = game.arrays
    if isinstance(mode, PureMaximin):
        Qm = np.where(arr.bmask[:, None, :], Q, np.inf)
        rowmin = np.where(arr.amask, Qm.min(axis=2), -np.inf)
        choice = np.argmax(rowmin, axis=1)
        return rowmin[np.arange(len(choice)), choice], choice
    out = np.empty(Q.shape[0])
    for i, s in enumerate(game.states):
        M = Q[i, : len(game.max_actions[s]), : len(game.min_actions[s])]
        lower, _, upper, _ = pure_bounds(M)
        out[i] = lower if lower == upper else solve_matrix_game(M, mode.lp_tol).value
    return out, None


class _Stepper:
    """One application of the stage operator with affine stage data.

    Computes ``stage(cw * G + cont * E[f])`` per state, where ``G`` is the
    stage cost (transformed by ``A g + B`` when requested).
    """

    def __init__(self, game: GameInstance, mode: StageMode, cost_scale=1.0, cost_shift=0.0):
        self.game = game
        self.mode = mode
        arr = game.arrays
        self.P = arr.P
        self.G = cost_scale * arr.G + cost_shift
        self.state_only = not game.action_cost
        valid = self.G[arr.amask[:, :, None] & arr.bmask[:, None, :]]
        self.lo, self.hi = float(valid.min()), float(valid.max())

    def clip(self, means: np.ndarray) -> np.ndarray:
        # every value is a mean of stage costs, so it lies in their range;
        # clipping removes rounding drift and makes constant costs exact
        return np.clip(means, self.lo, self.hi)

    def __call__(self, f: np.ndarray, cw: float, cont: float):
        EQ = np.einsum("sabt,t->sab", self.P, f)
        if self.state_only:
            vals, choice = _stage_all(self.game, cont * EQ, self.mode)
            return cw * self.G[:, 0, 0] + vals, choice
        return _stage_all(self.game, cw * self.G + cont * EQ, self.mode)


@dataclass
class SolveReport:
    """Outcome of a value computation."""

    mode: str
    values: ValueFunction
    iterations: int
    residual: float
    tol: float | None = None
    parameter: dict = field(default_factory=dict)
    choices: dict[str, str] | None = None

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "parameter": self.parameter,
            "iterations": self.iterations,
            "residual": self.residual,
            "tol": self.tol,
            "values": self.values.as_dict(),
            "choices": self.choices,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _choices(game, choice) -> dict[str, str] | None:
    if choice is None:
        return None
    return {s: game.max_actions[s][int(c)] for s, c in zip(game.states, choice)}


def horizon_totals(game: GameInstance, n_max: int, mode: StageMode = PureMaximin(), cost=(1.0, 0.0)):
    """Totals ``S_1..S_n_max`` (array of shape (n_max, S)) of the horizon recursion."""
    if int(n_max) != n_max or n_max < 1:
        raise ValueError(f"n_max must be a positive integer, got {n_max}")
    step = _Stepper(game, mode, *cost)
    S = np.zeros((int(n_max), len(game.states)))
    total = np.zeros(len(game.states))
    for k in range(int(n_max)):
        total, _ = step(total, 1.0, 1.0)
        S[k] = total
    return S


def finite_horizon_values(game: GameInstance, n_max: int, mode: StageMode = PureMaximin()) -> list[ValueFunction]:
    """``[V_1, ..., V_n_max]``: lower values of the n-stage average payoff."""
    S = horizon_totals(game, n_max, mode)
    clip = _Stepper(game, mode).clip
    return [ValueFunction.from_array(game.states, clip(S[k] / (k + 1))) for k in range(len(S))]


def fractional_horizon_totals(game: GameInstance, T: float, mode: StageMode = PureMaximin(), cost=(1.0, 0.0)):
    """``T * V[v_T]`` as an array; see :func:`fractional_horizon_value`."""
    if not T > 0 or not math.isfinite(T):
        raise ValueError(f"T must be positive, got {T}")
    m = math.ceil(T) - 1
    theta = T - m
    step = _Stepper(game, mode, *cost)
    U, _ = step(np.zeros(len(game.states)), theta, 0.0)
    for _ in range(m):
        U, _ = step(U, 1.0, 1.0)
    return U


def fractional_horizon_value(game: GameInstance, T: float, mode: StageMode = PureMaximin()) -> ValueFunction:
    """Lower value of the continuous average over ``[0, T]`` for any real ``T > 0``.

    With ``T = m + theta``, ``theta`` in (0, 1], the last stage is played for
    ``theta`` time units and ``m`` full stages precede it.
    """
    clip = _Stepper(game, mode).clip
    return ValueFunction.from_array(game.states, clip(fractional_horizon_totals(game, T, mode) / T))


def discounted_values(
    game: GameInstance,
    mu: float,
    tol: float = 1e-10,
    mode: StageMode = PureMaximin(),
    max_iter: int = 10_000_000,
    cost=(1.0, 0.0),
    bounds=(0.0, 1.0),
) -> tuple[ValueFunction, SolveReport]:
    """Fixed point of ``f -> mu g + (1 - mu) stage(E f)`` by value iteration.

    Stops once ``|f_{k+1} - f_k| (1 - mu) / mu <= tol``, which bounds the
    distance of the returned iterate to the fixed point by ``tol``.
    """
    if not 0 < mu < 1:
        raise ValueError(f"mu must lie in (0, 1), got {mu}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    step = _Stepper(game, mode, *cost)
    f = np.zeros(len(game.states))
    factor = (1.0 - mu) / mu
    choice = None
    for k in range(1, max_iter + 1):
        nxt, choice = step(f, mu, 1.0 - mu)
        residual = float(np.max(np.abs(nxt - f)))
        f = nxt
        if residual * factor <= tol or residual == 0.0:
            vf = ValueFunction.from_array(game.states, step.clip(f), bounds)
            report = SolveReport(
                mode.name, vf, k, residual * factor, tol, {"mu": mu}, _choices(game, choice)
            )
            return vf, report
    raise ConvergenceError(f"no convergence in {max_iter} iterations (mu={mu})")


def continuous_discounted_value(
    game: GameInstance, lam: float, tol: float = 1e-10, mode: StageMode = PureMaximin()
) -> ValueFunction:
    """Lower value of the continuous-time discounted mean with rate ``lam``."""
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    return discounted_values(game, discount_to_prob(lam), tol, mode)[0]


def propagate_horizon(game, U: ValueFunction, T: float, h: int, mode: StageMode = PureMaximin(), cost=(1.0, 0.0)):
    """Value of the composite payoff: ``h`` stages then ``U`` as a horizon-``T`` tail.

    Returns the raw array (not range-checked, since ``U`` may be arbitrary).
    """
    step = _Stepper(game, mode, *cost)
    W = T * np.asarray(U.array if isinstance(U, ValueFunction) else U, dtype=float)
    for _ in range(int(h)):
        W, _ = step(W, 1.0, 1.0)
    return W / (T + h)


def propagate_discount(game, U, mu: float, h: int, mode: StageMode = PureMaximin(), cost=(1.0, 0.0)):
    """Value of ``h`` discounted stages followed by ``(1 - mu)^h U``."""
    step = _Stepper(game, mode, *cost)
    W = np.asarray(U.array if isinstance(U, ValueFunction) else U, dtype=float)
    for _ in range(int(h)):
        W, _ = step(W, mu, 1.0 - mu)
    return W


def enumeration_size(game: GameInstance, n: int) -> int:
    return math.prod(len(game.max_actions[s]) ** n for s in game.states)


def brute_force_value(game: GameInstance, n: int, cap: int = 1 << 20) -> ValueFunction:
    """Horizon-``n`` lower value by enumerating every nonstationary Markov
    maximizer policy and computing the minimizer's exact best response.

    The minimizer sees the maximizer's current action, so for a fixed policy
    it faces a finite-horizon minimization solved backwards in time.  No
    maximization happens inside the recursion; the sup is taken over the
    explicit policy list.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    size = enumeration_size(game, n)
    if size > cap:
        raise OracleCapExceeded(size, cap)
    arr = game.arrays
    S = len(game.states)
    idx = np.arange(S)
    # all (time, state) -> action assignments, one row per policy
    per_slot = [range(len(game.max_actions[s])) for _ in range(n) for s in game.states]
    best = np.full(S, -np.inf)
    chunk = 4096
    it = itertools.product(*per_slot)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            break
        pol = np.array(block, dtype=np.intp).reshape(len(block), n, S)
        W = np.zeros((len(block), S))
        for t in range(n - 1, -1, -1):
            a = pol[:, t, :]
            Pa = arr.P[idx, a]  # (K, S, B, S')
            Ga = arr.G[idx, a]  # (K, S, B)
            Q = Ga + np.einsum("ksbt,kt->ksb", Pa, W)
            Q = np.where(arr.bmask[None], Q, np.inf)
            W = Q.min(axis=2)
        best = np.maximum(best, W.max(axis=0))
    return ValueFunction.from_array(game.states, best / n)


def values_to_csv(states, rows: dict[str, ValueFunction]) -> str:
    """CSV with one column per labelled value function."""
    labels = list(rows)
    lines = [",".join(["state"] + labels)]
    for i, s in enumerate(states):
        lines.append(",".join([s] + [format_float(rows[k].values[i]) for k in labels]))
    return "\n".join(lines) + "\n"
