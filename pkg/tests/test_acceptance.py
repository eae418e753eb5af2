"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or directly with ``python tests/test_acceptance.py``.
"""

import math
import random
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from tauberlab.cli import run
from tauberlab.core import random_game
from tauberlab.games import bundled_games, go_to_good, matching_pennies_chain, two_absorbing
from tauberlab.payoffs import Abel, Cesaro, DiscreteAbel, DiscreteCesaro
from tauberlab.solver import (
    MixedValue,
    PureMaximin,
    brute_force_value,
    discounted_values,
    finite_horizon_values,
)
from tauberlab.tauberian import (
    check_discount_estimate,
    check_discretization_bound,
    check_horizon_estimate,
    discount_propagation_residual,
    dpp_composition_residual,
    gap_scan,
)
from tauberlab.valuemap import ControlMap, DPMap, EnumerativeMap, Recosted, affine, check_affine, check_monotone

MODES = (PureMaximin(), MixedValue())
TOL = 1e-10

RESULTS: dict[int, str] = {}


def report(number, title, ok, detail, elapsed):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail}; {elapsed:.2f} s)"
    RESULTS[number] = line
    print(line)
    assert ok, line


def criterion_1():
    t0 = time.perf_counter()
    worst_exact = worst_lp = 0.0
    good = go_to_good()
    V = finite_horizon_values(good, 64)
    for n in range(1, 65):
        worst_exact = max(worst_exact, abs(V[n - 1]["s0"] - (n - 1) / n))
    for mu in (0.5, 0.1, 0.01):
        W, _ = discounted_values(good, mu, 1e-13)
        worst_exact = max(worst_exact, abs(W["s0"] - (1 - mu)))
    pennies = matching_pennies_chain()
    mixed = MixedValue()
    V = finite_horizon_values(pennies, 64, mixed)
    for n in range(1, 65):
        worst_lp = max(worst_lp, abs(V[n - 1]["H"] - (n + 1) / (2 * n)))
    for mu in (0.5, 0.1, 0.01):
        W, _ = discounted_values(pennies, mu, 1e-11, mixed)
        worst_lp = max(worst_lp, abs(W["H"] - (1 + mu) / 2))
    dt = time.perf_counter() - t0
    ok = worst_exact <= 1e-12 and worst_lp <= 1e-9 and dt < 1.0
    report(1, "closed forms", ok, f"go-to-good err {worst_exact:.1e}, pennies err {worst_lp:.1e}", dt)


def criterion_2():
    t0 = time.perf_counter()
    worst, fails = 0.0, []
    for name, g in bundled_games().items():
        for mode in MODES:
            rep = gap_scan(g, [16, 256], mode, "exp", TOL)
            d16, d256 = rep.gap_at(16), rep.gap_at(256)
            worst = max(worst, d256)
            if not (d256 <= 0.1 and d256 <= d16):
                fails.append(f"{name}/{mode.name}: D16={d16:.3g} D256={d256:.3g}")
    # the two-absorbing game has a genuinely state-dependent limit
    rec = gap_scan(two_absorbing(), [256]).records[0]
    spread = float(np.ptp(rec.horizon.array))
    per_state = float(np.max(np.abs(rec.horizon.array - rec.discounted.array)))
    if not (spread >= 0.5 and per_state <= 0.1):
        fails.append(f"two-absorbing spread {spread:.3g} per-state gap {per_state:.3g}")
    dt = time.perf_counter() - t0
    ok = not fails and dt < 10.0
    detail = f"max D(256) {worst:.2e}, two-absorbing limit spread {spread:.2f}"
    report(2, "Tauberian convergence", ok, detail if not fails else "; ".join(fails), dt)


def _seeded_game(rng):
    S, A, B = rng.randint(1, 4), rng.randint(1, 3), rng.randint(1, 3)
    stochastic = rng.random() < 0.5
    support = rng.choice([None, 2]) if stochastic and S >= 2 else None
    return random_game((S, A, B), rng.getrandbits(32), deterministic=not stochastic, support=support)


def criterion_3():
    t0 = time.perf_counter()
    rng = random.Random(20120)
    games = list(bundled_games().values())
    violations, worst = [], math.inf
    for k in range(200):
        g = games[k % len(games)] if k % 3 == 0 else _seeded_game(rng)
        mode = MODES[k % 4 // 2]
        r = 1.0 + rng.uniform(1e-3, 1.0)
        if k % 2 == 0:
            T = math.exp(rng.uniform(math.log(0.1), math.log(60)))
            m = check_horizon_estimate(g, T, r, mode)
            ok = m >= 0
        else:
            lam = math.exp(rng.uniform(math.log(0.02), math.log(5)))
            m = check_discount_estimate(g, lam, r, TOL, mode)
            ok = m >= -2 * TOL
        worst = min(worst, m)
        if not ok:
            violations.append((k, g.name, m))
    dt = time.perf_counter() - t0
    ok = not violations and dt < 30.0
    report(3, "scaling estimates", ok, f"200 triples, {len(violations)} violations, min margin {worst:.3g}", dt)


def criterion_4():
    t0 = time.perf_counter()
    worst_comp, worst_ratio = 0.0, 0.0
    for g in bundled_games().values():
        for mode in MODES:
            res, _ = dpp_composition_residual(g, 64, 8, mode)
            worst_comp = max(worst_comp, res)
            for mu in (0.5, 0.1, 0.01):
                bound = TOL * ((1 - mu) / mu + 1) + 1e-12
                worst_ratio = max(worst_ratio, discount_propagation_residual(g, mu, 8, TOL, mode) / bound)
    dt = time.perf_counter() - t0
    ok = worst_comp <= 1e-12 and worst_ratio <= 1.0
    report(4, "weak DPP", ok, f"composition {worst_comp:.1e}, discounted residual at {worst_ratio:.2f} of bound", dt)


def criterion_5():
    t0 = time.perf_counter()
    rng = random.Random(295)
    worst, count, stochastic = 0.0, 0, 0
    for k in range(60):
        S, A, B = rng.randint(1, 3), rng.randint(1, 2), rng.randint(1, 2)
        det = k % 2 == 0
        g = random_game((S, A, B), rng.getrandbits(32), deterministic=det, support=None if det or S < 2 else 2)
        stochastic += not det
        for n in range(1, 5):
            V = finite_horizon_values(g, n)[-1].array
            worst = max(worst, float(np.max(np.abs(brute_force_value(g, n).array - V))))
        count += 1
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and count >= 50
    report(5, "oracle equivalence", ok, f"{count} games ({stochastic} stochastic), n<=4, max diff {worst:.1e}", dt)


def _payoff_pair(rng, g):
    """A random payoff on ``g`` and a certified dominating one."""
    kind = rng.randrange(4)
    if kind == 0:
        spec = DiscreteCesaro(rng.randint(1, 3))
    elif kind == 1:
        spec = Cesaro(rng.uniform(0.2, 3.0))
    elif kind == 2:
        spec = DiscreteAbel(rng.uniform(0.1, 0.9))
    else:
        spec = Abel(rng.uniform(0.1, 2.5))
    if rng.random() < 0.5:
        low = {s: rng.uniform(0, 1) for s in g.states}
        high = {s: min(1.0, v + rng.uniform(0, 0.5)) for s, v in low.items()}
        return Recosted.of(spec, low), Recosted.of(spec, high)
    c1 = affine(spec, rng.uniform(0, 2), rng.uniform(-1, 1))
    return c1, affine(spec, c1.A, c1.B + rng.uniform(0, 0.5))


def criterion_6():
    t0 = time.perf_counter()
    rng = random.Random(3)
    maps = {"dp": DPMap(), "enumerative": EnumerativeMap(horizon=2), "control": ControlMap(horizon=2)}
    worst = {name: 0.0 for name in maps}
    checked = {name: 0 for name in maps}
    for k in range(100):
        # infinite-horizon payoffs are enumerated over stationary rules, which needs determinism
        g = random_game((2, 2, 2), 6000 + k, deterministic=k % 2 == 0, support=None if k % 2 == 0 else 2)
        while True:
            c1, c2 = _payoff_pair(rng, g)
            if all(vm.accepts(g, c1) for vm in maps.values()):
                break
        A, B = rng.uniform(0, 3), rng.uniform(-1, 1)
        for name, vm in maps.items():
            worst[name] = max(worst[name], check_affine(vm, g, c1, A, B), check_monotone(vm, g, c1, c2))
            checked[name] += 1
    dt = time.perf_counter() - t0
    ok = all(v <= 1e-12 for v in worst.values()) and min(checked.values()) >= 100
    detail = ", ".join(f"{n} {v:.1e}" for n, v in worst.items())
    report(6, "value-map axioms", ok, f"100 pairs per map, worst margins: {detail}", dt)


def criterion_7():
    t0 = time.perf_counter()
    rng = random.Random(7)
    games = list(bundled_games().values())
    violations, worst = 0, math.inf
    for k in range(100):
        g = games[k % len(games)] if k % 4 == 0 else _seeded_game(rng)
        T = rng.uniform(0.05, 40)
        if T == int(T):
            T += 0.5
        m = check_discretization_bound(g, T, MODES[k % 2])
        worst = min(worst, m)
        violations += m < 0
    dt = time.perf_counter() - t0
    report(7, "discretization bound", violations == 0, f"100 fractional horizons, {violations} violations, min margin {worst:.3g}", dt)


CLI_RUNS = [
    ["scan", "--bundled", "two-absorbing"],
    ["scan", "--bundled", "random-stochastic-a", "--mode", "mixed", "--n", "1:64:geometric4"],
    ["solve", "--random", "3,2,2", "--seed", "11", "--stochastic", "--support", "2", "--lambda", "0.2"],
    ["solve", "--bundled", "matching-pennies-chain", "--mode", "mixed", "--horizon", "7.25"],
    ["estimates", "--bundled", "go-to-good"],
    ["dpp", "--bundled", "constant", "--n-max", "16"],
    ["oracle", "--random", "2,2,2", "--seed", "4", "--n", "1:3"],
]


def criterion_8():
    t0 = time.perf_counter()
    differing = []
    with tempfile.TemporaryDirectory() as tmp:
        for i, argv in enumerate(CLI_RUNS):
            blobs = []
            for rep in range(2):
                out = Path(tmp) / f"{i}-{rep}.csv"
                code = run([*argv, "--out", str(out)])
                blobs.append((code, out.read_bytes()))
            if blobs[0] != blobs[1] or blobs[0][0] != 0 or not blobs[0][1]:
                differing.append(" ".join(argv))
    dt = time.perf_counter() - t0
    report(8, "CLI determinism", not differing, f"{len(CLI_RUNS)} configurations run twice, {len(differing)} differ", dt)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 9)])
def test_criterion(criterion):
    criterion()


if __name__ == "__main__":
    failed = 0
    for crit in CRITERIA:
        try:
            crit()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
