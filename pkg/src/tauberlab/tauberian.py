"""Verification harness for the average/discounted value limits.

Uniform convergence over an abstract state space is replaced by the exact
sup over the finite state set; every report says so in its header.
Limsup-type conditions are only sampled at finite indices and reported,
never asserted as limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .core import GameInstance, ValueFunction, format_float
from .payoffs import discount_to_prob
from .solver import (
    PureMaximin,
    StageMode,
    continuous_discounted_value,
    discounted_values,
    finite_horizon_values,
    fractional_horizon_value,
    propagate_discount,
    propagate_horizon,
)

HEADER_NOTE = "sup norms are exact maxima over the finite state set"

PAIRINGS = {
    "exp": lambda n: discount_to_prob(1.0 / n),
    "inverse": lambda n: 1.0 / n,
}


@dataclass(frozen=True)
class ScanRecord:
    n: int
    mu: float
    horizon: ValueFunction
    discounted: ValueFunction

    @property
    def gap_above(self) -> float:
        """``max_s (V_n - W_mu)``."""
        return float(np.max(self.horizon.array - self.discounted.array))

    @property
    def gap_below(self) -> float:
        """``max_s (W_mu - V_n)``."""
        return float(np.max(self.discounted.array - self.horizon.array))

    @property
    def gap(self) -> float:
        return max(self.gap_above, self.gap_below)


@dataclass(frozen=True)
class ScanReport:
    game: str
    states: tuple[str, ...]
    pairing: str
    mode: str
    tol: float
    records: tuple[ScanRecord, ...]

    def gap_at(self, n: int) -> float:
        for r in self.records:
            if r.n == n:
                return r.gap
        raise KeyError(n)

    def columns(self) -> list[str]:
        return (
            ["index", "n", "mu"]
            + [f"V_{s}" for s in self.states]
            + [f"W_{s}" for s in self.states]
            + ["gap", "gap_above", "gap_below"]
        )

    def rows(self) -> list[list[str]]:
        out = []
        for i, r in enumerate(self.records):
            out.append(
                [str(i), str(r.n), format_float(r.mu)]
                + [format_float(v) for v in r.horizon.values]
                + [format_float(v) for v in r.discounted.values]
                + [format_float(x) for x in (r.gap, r.gap_above, r.gap_below)]
            )
        return out

    def header(self) -> str:
        return f"# game={self.game} pairing={self.pairing} mode={self.mode} tol={self.tol!r}; {HEADER_NOTE}"

    def to_csv(self) -> str:
        return render_csv(self.columns(), self.rows())

    def to_table(self) -> str:
        return self.header() + "\n" + render_table(self.columns(), self.rows())


def render_csv(columns: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    return "\n".join(",".join(r) for r in [list(columns), *rows]) + "\n"


def render_table(columns: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    table = [list(columns), *[list(r) for r in rows]]
    widths = [max(len(row[j]) for row in table) for j in range(len(columns))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in table) + "\n"


def gap_scan(
    game: GameInstance,
    n_list: Sequence[int],
    mode: StageMode = PureMaximin(),
    pairing: str = "exp",
    tol: float = 1e-10,
) -> ScanReport:
    """Horizon values ``V_n`` against discounted values ``W_{mu_n}`` along a pairing.

    ``pairing="exp"`` uses ``mu_n = 1 - exp(-1/n)``, ``"inverse"`` uses ``mu_n = 1/n``.
    """
    n_list = [int(n) for n in n_list]
    if not n_list:
        raise ValueError("n_list is empty")
    if any(n < 1 for n in n_list) or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly increasing positive integers")
    if pairing not in PAIRINGS:
        raise ValueError(f"unknown pairing {pairing!r}")
    V = finite_horizon_values(game, n_list[-1], mode)
    records = []
    for n in n_list:
        mu = PAIRINGS[pairing](n)
        if mu >= 1.0:
            # n = 1 under the inverse pairing: the discount collapses to the stage cost
            W = V[0]
        else:
            W, _ = discounted_values(game, mu, tol, mode)
        records.append(ScanRecord(n, mu, V[n - 1], W))
    return ScanReport(game.name, game.states, pairing, mode.name, tol, tuple(records))


def check_horizon_estimate(game, T: float, r: float, mode: StageMode = PureMaximin()) -> float:
    """``2(r - 1) - |V[v_T] - V[v_rT]|``; non-negative when the estimate holds."""
    if not T > 0 or not r > 1:
        raise ValueError(f"need T > 0 and r > 1, got T={T}, r={r}")
    a = fractional_horizon_value(game, T, mode)
    b = fractional_horizon_value(game, r * T, mode)
    return 2.0 * (r - 1.0) - a.sup_distance(b)


def check_discount_estimate(game, lam: float, r: float, tol: float = 1e-10, mode: StageMode = PureMaximin()) -> float:
    """``2(r - 1) - |V[w_lam] - V[w_{r lam}]|``; passes when ``>= -2 tol``."""
    if not lam > 0 or not r > 1:
        raise ValueError(f"need lam > 0 and r > 1, got lam={lam}, r={r}")
    a = continuous_discounted_value(game, lam, tol, mode)
    b = continuous_discounted_value(game, r * lam, tol, mode)
    return 2.0 * (r - 1.0) - a.sup_distance(b)


def check_discretization_bound(game, T: float, mode: StageMode = PureMaximin()) -> float:
    """``2(ceil(T) - T)/T - |V_ceil(T) - V[v_T]|``."""
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    n = math.ceil(T)
    a = finite_horizon_values(game, n, mode)[-1]
    b = fractional_horizon_value(game, T, mode)
    return 2.0 * (n - T) / T - a.sup_distance(b)


def check_subsolution(
    game: GameInstance,
    family: Mapping[float, ValueFunction],
    h_set: Sequence[int],
    eps: float = 0.0,
    which: str = "horizon",
    kind: str = "sub",
    mode: StageMode = PureMaximin(),
    indices: Sequence[float] | None = None,
) -> float:
    """Largest signed violation of the sub- (or super-) solution inequality.

    Horizon families are indexed by ``T`` and compared as
    ``U_{T+h}`` against the value of ``h`` stages followed by ``U_T``;
    discount families are indexed by ``lam`` and compared as ``U_lam``
    against ``h`` discounted stages followed by ``U_lam``.  A non-positive
    result means the inequality holds on every tested pair.
    """
    if which not in ("horizon", "discount") or kind not in ("sub", "super"):
        raise ValueError(f"bad which/kind: {which}/{kind}")
    keys = list(family) if indices is None else list(indices)
    worst = -math.inf
    for T in keys:
        if T not in family:
            raise KeyError(f"family has no member at index {T}")
        U = family[T]
        for h in h_set:
            if which == "horizon":
                if T + h not in family:
                    if indices is None:
                        continue
                    raise KeyError(f"family has no member at index {T + h}")
                target = family[T + h].array
                prop = propagate_horizon(game, U, T, h, mode)
            else:
                target = U.array
                prop = propagate_discount(game, U, discount_to_prob(T), h, mode)
            diff = target - prop if kind == "sub" else prop - target
            worst = max(worst, float(np.max(diff)) - eps)
    if worst == -math.inf:
        raise KeyError("no testable (index, h) pairs in the family")
    return worst


def dpp_composition_residual(game, n_max: int = 64, h_max: int = 8, mode: StageMode = PureMaximin()) -> tuple[float, tuple]:
    """Max over ``n + h <= n_max, h <= h_max`` of ``|V_{n+h} - h-step propagation of V_n|``."""
    V = finite_horizon_values(game, n_max, mode)
    worst, where = 0.0, ()
    for n in range(1, n_max):
        for h in range(1, min(h_max, n_max - n) + 1):
            prop = propagate_horizon(game, V[n - 1], n, h, mode)
            d = float(np.max(np.abs(prop - V[n + h - 1].array)))
            if d > worst:
                worst, where = d, (n, h)
    return worst, where


def discount_propagation_residual(game, mu: float, h_max: int = 8, tol: float = 1e-10, mode: StageMode = PureMaximin()) -> float:
    """Max over ``h <= h_max`` of ``|W - h-fold discounted propagation of W|``."""
    W, _ = discounted_values(game, mu, tol, mode)
    return max(
        float(np.max(np.abs(propagate_discount(game, W, mu, h, mode) - W.array)))
        for h in range(1, h_max + 1)
    )


@dataclass(frozen=True)
class KappaTable:
    """Sampled slowly-varying diagnostics; ``rows`` are ``(index, p0, kappa)``."""

    kind: str
    grid: str
    rows: tuple[tuple[float, float, float], ...]
    substitutions: tuple[tuple[float, float], ...] = field(default=())

    def to_csv(self) -> str:
        body = [[str(i), format_float(x), format_float(p), format_float(k)] for i, (x, p, k) in enumerate(self.rows)]
        return render_csv(["index", "parameter", "p0", "kappa"], body)


def geometric_grid(p0: float, size: int = 32) -> np.ndarray:
    if size < 1:
        raise ValueError("empty grid")
    if size == 1:
        return np.array([float(p0)])
    return np.geomspace(1.0, p0, size)


def _lookup(family, index, subs):
    if callable(family):
        return family(index)
    if index in family:
        return family[index]
    nearest = min(family, key=lambda k: (abs(k - index), k))
    subs.append((index, nearest))
    return family[nearest]


def _kappa(family, base, scaled_index, p0, grid_size, subs):
    if not p0 >= 1:
        raise ValueError(f"p0 must be >= 1, got {p0}")
    U0 = _lookup(family, base, subs).array
    best = -math.inf
    for p in geometric_grid(p0, grid_size):
        best = max(best, float(np.max(_lookup(family, scaled_index(p), subs).array - U0)))
    return best


def kappa_horizon(family, T: float, p0: float, grid_size: int = 32, substitutions: list | None = None) -> float:
    """Sampled ``sup_{p in [1, p0]} max_s (U_{T/p}(s) - U_T(s))``; a lower bound on the true sup.

    ``family`` is a callable index -> ValueFunction or a dict; for dicts the
    nearest available index is used and recorded in ``substitutions``.
    """
    subs = [] if substitutions is None else substitutions
    return _kappa(family, T, lambda p: T / p, p0, grid_size, subs)


def kappa_discount(family, lam: float, p0: float, grid_size: int = 32, substitutions: list | None = None) -> float:
    """Sampled ``sup_{p in [1, p0]} max_s (U_lam(s) - U_{p lam}(s))``."""
    subs = [] if substitutions is None else substitutions
    if not p0 >= 1:
        raise ValueError(f"p0 must be >= 1, got {p0}")
    U0 = _lookup(family, lam, subs).array
    best = -math.inf
    for p in geometric_grid(p0, grid_size):
        best = max(best, float(np.max(U0 - _lookup(family, p * lam, subs).array)))
    return best


def kappa_table(family, indices: Sequence[float], p0_list: Sequence[float], kind: str = "horizon", grid_size: int = 32) -> KappaTable:
    """Kappa over ``indices x p0_list`` sampled on one shared grid.

    Every ``p0`` sees the shared grid points up to ``p0`` plus ``p0`` itself,
    so the table is non-decreasing in ``p0`` by construction.
    """
    if kind not in ("horizon", "discount"):
        raise ValueError(kind)
    p0_list = sorted(p0_list)
    shared = geometric_grid(p0_list[-1], grid_size)
    subs: list = []
    rows = []
    for x in indices:
        values = {}
        for p in sorted(set(shared) | set(p0_list)):
            if kind == "horizon":
                d = _lookup(family, x / p, subs).array - _lookup(family, x, subs).array
            else:
                d = _lookup(family, x, subs).array - _lookup(family, p * x, subs).array
            values[p] = float(np.max(d))
        for p0 in p0_list:
            rows.append((float(x), float(p0), max(v for p, v in values.items() if p <= p0)))
    grid = f"geometric {grid_size} points on [1, {p0_list[-1]!r}] plus each p0"
    return KappaTable(kind, grid, tuple(rows), tuple(dict.fromkeys(subs)))


def horizon_family(game, T_values: Sequence[float], mode: StageMode = PureMaximin()) -> dict[float, ValueFunction]:
    return {T: fractional_horizon_value(game, T, mode) for T in T_values}


def discount_family(game, lam_values: Sequence[float], tol: float = 1e-10, mode: StageMode = PureMaximin()) -> dict[float, ValueFunction]:
    return {lam: continuous_discounted_value(game, lam, tol, mode) for lam in lam_values}


def observed_rate(report: ScanReport) -> float | None:
    """Least-squares slope of ``log D(n)`` against ``log n``, or None when gaps vanish."""
    pts = [(math.log(r.n), math.log(r.gap)) for r in report.records if r.gap > 0]
    if len(pts) < 2:
        return None
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])
