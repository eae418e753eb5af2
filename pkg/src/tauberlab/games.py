"""Bundled example games with known closed forms."""

from __future__ import annotations

from .core import GameInstance, random_game, validate_game


def _single(s, amax=("stay",), amin=("idle",)):
    return {"max": list(amax), "min": list(amin)}


def constant_game(c: float = 0.3) -> GameInstance:
    """Two states with equal cost; every value equals ``c``."""
    states = ["x", "y"]
    acts = {s: _single(s, ("left", "right"), ("up", "down")) for s in states}
    trans = {
        "x": {"left": {"up": {"x": 1.0}, "down": {"y": 1.0}},
              "right": {"up": {"y": 0.5, "x": 0.5}, "down": {"x": 1.0}}},
        "y": {"left": {"up": {"y": 1.0}, "down": {"x": 1.0}},
              "right": {"up": {"x": 1.0}, "down": {"y": 1.0}}},
    }
    return validate_game({"name": "constant", "states": states,
                          "cost": {"x": c, "y": c}, "actions": acts, "transitions": trans})


def go_to_good() -> GameInstance:
    """``s0`` (cost 0) may stay or move to the absorbing ``s1`` (cost 1).

    ``V_n(s0) = (n - 1) / n`` and ``W_mu(s0) = 1 - mu``.
    """
    return validate_game({
        "name": "go-to-good",
        "states": ["s0", "s1"],
        "cost": {"s0": 0.0, "s1": 1.0},
        "actions": {"s0": _single("s0", ("stay", "go")), "s1": _single("s1")},
        "transitions": {
            "s0": {"stay": {"idle": {"s0": 1.0}}, "go": {"idle": {"s1": 1.0}}},
            "s1": {"stay": {"idle": {"s1": 1.0}}},
        },
    })


def matching_pennies_chain() -> GameInstance:
    """Both players pick a bit; a match leads to ``H`` (cost 1), else ``T`` (cost 0).

    Under mixed play ``V_n(H) = (n + 1) / (2n)`` and ``W_mu(H) = (1 + mu) / 2``.
    """
    bits = ["0", "1"]
    trans = {
        s: {a: {b: {("H" if a == b else "T"): 1.0} for b in bits} for a in bits}
        for s in ("H", "T")
    }
    return validate_game({
        "name": "matching-pennies-chain",
        "states": ["H", "T"],
        "cost": {"H": 1.0, "T": 0.0},
        "actions": {s: {"max": bits, "min": bits} for s in ("H", "T")},
        "transitions": trans,
    })


def two_absorbing() -> GameInstance:
    """A transient ``start`` state between absorbing ``good`` (1) and ``bad`` (0).

    The maximizer gambles (``risky``: even odds) or plays ``safe`` (stay unless
    the minimizer pushes to ``bad``), so limits differ across states.
    """
    return validate_game({
        "name": "two-absorbing",
        "states": ["start", "good", "bad"],
        "cost": {"start": 0.5, "good": 1.0, "bad": 0.0},
        "actions": {
            "start": {"max": ["risky", "safe"], "min": ["x", "y"]},
            "good": _single("good"),
            "bad": _single("bad"),
        },
        "transitions": {
            "start": {
                "risky": {"x": {"good": 0.5, "bad": 0.5}, "y": {"good": 0.25, "bad": 0.75}},
                "safe": {"x": {"start": 1.0}, "y": {"bad": 1.0}},
            },
            "good": {"stay": {"idle": {"good": 1.0}}},
            "bad": {"stay": {"idle": {"bad": 1.0}}},
        },
    })


def random_stochastic_a() -> GameInstance:
    return random_game((3, 2, 2), seed=2024, deterministic=False)


def random_stochastic_b() -> GameInstance:
    return random_game((3, 2, 2), seed=7, deterministic=False, support=2)


BUNDLED = {
    "constant": constant_game,
    "go-to-good": go_to_good,
    "matching-pennies-chain": matching_pennies_chain,
    "two-absorbing": two_absorbing,
    "random-stochastic-a": random_stochastic_a,
    "random-stochastic-b": random_stochastic_b,
}


def bundled_games() -> dict[str, GameInstance]:
    return {name: build() for name, build in BUNDLED.items()}
