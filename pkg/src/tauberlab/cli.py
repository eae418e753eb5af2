"""Command-line front end.

Exit statuses: 0 ok, 1 configuration error, 2 game validation error,
3 oracle enumeration cap exceeded, 4 invariant failure.  Every failure
writes one ``error: <kind>: <message>`` line to stderr.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import tauberian as tb
from .core import GameInstance, GameValidationError, format_float, load_game, random_game
from .games import BUNDLED
from .lp import LPError
from .payoffs import discount_to_prob
from .solver import (
    ConvergenceError,
    OracleCapExceeded,
    brute_force_value,
    discounted_values,
    finite_horizon_values,
    fractional_horizon_value,
    mode_from_name,
)

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_CAP, EXIT_INVARIANT = 0, 1, 2, 3, 4


class ConfigError(Exception):
    pass


class InvariantFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def parse_grid(text: str, integer: bool = False) -> list:
    """Parse ``a,b,c`` or ``start:stop[:geometricK|linearK]`` into a sorted list.

    Integer grids are rounded and de-duplicated; ``start:stop`` alone steps by 1.
    """
    text = text.strip()
    conv = int if integer else float
    try:
        if ":" not in text:
            vals = [conv(x) for x in text.split(",") if x.strip()]
        else:
            parts = text.split(":")
            if len(parts) not in (2, 3):
                raise ValueError
            start, stop = float(parts[0]), float(parts[1])
            spec = parts[2] if len(parts) == 3 else ""
            if not spec:
                if not integer:
                    raise ConfigError(f"real range {text!r} needs a grid spec")
                vals = list(range(int(start), int(stop) + 1))
            elif spec.startswith("geometric"):
                k = int(spec[len("geometric"):])
                vals = list(np.geomspace(start, stop, k))
            elif spec.startswith("linear"):
                k = int(spec[len("linear"):])
                vals = list(np.linspace(start, stop, k))
            else:
                raise ValueError
            if integer:
                vals = [int(round(v)) for v in vals]
            else:
                vals = [float(f"{v:.12g}") for v in vals]
    except (ValueError, IndexError):
        raise ConfigError(f"cannot parse grid {text!r}") from None
    vals = sorted(set(vals))
    if not vals:
        raise ConfigError(f"empty grid {text!r}")
    return vals


@dataclass
class RunConfig:
    command: str
    game: GameInstance
    mode_name: str
    tol: float
    lp_tol: float
    args: argparse.Namespace

    @property
    def mode(self):
        return mode_from_name(self.mode_name, self.lp_tol)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    src = common.add_argument_group("input")
    src.add_argument("--game", help="game description JSON file")
    src.add_argument("--random", metavar="S,A,B", help="random game sizes")
    src.add_argument("--seed", type=int, default=0)
    src.add_argument("--stochastic", action="store_true", help="random game with stochastic transitions")
    src.add_argument("--support", type=int, default=None, help="support size of random stochastic transitions")
    src.add_argument("--bundled", choices=sorted(BUNDLED), help="one of the bundled example games")
    common.add_argument("--mode", choices=["pure", "mixed"], default="pure")
    common.add_argument("--tol", type=float, default=1e-10, help="fixed-point tolerance")
    common.add_argument("--lp-tol", type=float, default=1e-9)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=["csv", "table"], default="csv")

    parser = _Parser(prog="tauberlab", description="Average vs discounted values of finite zero-sum games.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="check a game description")

    p = sub.add_parser("solve", parents=[common], help="finite-horizon or discounted values")
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--horizon", type=float, help="horizon T (fractional allowed)")
    which.add_argument("--mu", type=float, help="discount probability")
    which.add_argument("--lambda", dest="lam", type=float, help="continuous discount rate")
    p.add_argument("--report", help="write the discounted solve report as JSON here")

    p = sub.add_parser("scan", parents=[common], help="horizon vs discounted gap scan")
    p.add_argument("--n", default="1:256:geometric16")
    p.add_argument("--pairing", choices=["exp", "inverse"], default="exp")

    p = sub.add_parser("estimates", parents=[common], help="horizon/discount/discretization estimate sweeps")
    p.add_argument("--T", dest="T", default="1:64:geometric7")
    p.add_argument("--lambda", dest="lam", default="0.01:1:geometric5")
    p.add_argument("--r", default="1.1,1.5,2")
    p.add_argument("--frac", default="1.5,2.25,3.7,10.3", help="fractional horizons for the discretization bound")

    p = sub.add_parser("dpp", parents=[common], help="dynamic-programming composition battery")
    p.add_argument("--n-max", type=int, default=64)
    p.add_argument("--h-max", type=int, default=8)
    p.add_argument("--mu", default="0.5,0.1,0.01")
    p.add_argument("--atol", type=float, default=1e-12)

    p = sub.add_parser("oracle", parents=[common], help="brute-force enumeration vs backward induction")
    p.add_argument("--n", default="1:3")
    p.add_argument("--cap", type=int, default=1 << 20)
    p.add_argument("--atol", type=float, default=1e-12)
    return parser


def _load_input(args) -> GameInstance:
    given = [x for x in (args.game, args.random, args.bundled) if x]
    if len(given) != 1:
        raise ConfigError("give exactly one of --game, --random, --bundled")
    if args.game:
        try:
            return load_game(args.game)
        except OSError as exc:
            raise ConfigError(f"cannot read {args.game}: {exc.strerror}") from None
    if args.bundled:
        return BUNDLED[args.bundled]()
    try:
        sizes = tuple(int(x) for x in args.random.split(","))
        if len(sizes) != 3:
            raise ValueError
        return random_game(sizes, args.seed, deterministic=not args.stochastic, support=args.support)
    except ValueError as exc:
        raise ConfigError(f"bad --random spec {args.random!r}: {exc}") from None


def _emit(cfg: RunConfig, columns, rows, header: str | None = None):
    if cfg.args.format == "csv":
        text = tb.render_csv(columns, rows)
    else:
        text = (header + "\n" if header else "") + tb.render_table(columns, rows)
    if cfg.args.out:
        with open(cfg.args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _status(ok: bool) -> str:
    return "pass" if ok else "FAIL"


def cmd_validate(cfg: RunConfig):
    g = cfg.game
    rows = [
        ["name", g.name],
        ["states", str(len(g.states))],
        ["action_cost", str(g.action_cost).lower()],
        ["deterministic", str(g.deterministic).lower()],
        ["status", "valid"],
    ]
    _emit(cfg, ["field", "value"], rows)


def cmd_solve(cfg: RunConfig):
    a, g = cfg.args, cfg.game
    if a.horizon is not None:
        if not a.horizon > 0:
            raise ConfigError("--horizon must be positive")
        T = a.horizon
        if T == int(T):
            vf = finite_horizon_values(g, int(T), cfg.mode)[-1]
        else:
            vf = fractional_horizon_value(g, T, cfg.mode)
        label = f"horizon={format_float(T)}"
    else:
        if a.mu is not None:
            if not 0 < a.mu < 1:
                raise ConfigError("--mu must lie in (0, 1)")
            mu = a.mu
        else:
            if not a.lam > 0:
                raise ConfigError("--lambda must be positive")
            mu = discount_to_prob(a.lam)
        vf, report = discounted_values(g, mu, cfg.tol, cfg.mode)
        if a.report:
            with open(a.report, "w") as fh:
                fh.write(report.to_json() + "\n")
        label = f"mu={format_float(mu)}"
    rows = [[s, format_float(v)] for s, v in zip(vf.states, vf.values)]
    _emit(cfg, ["state", "value"], rows, f"# {g.name} {label} mode={cfg.mode_name}")


def cmd_scan(cfg: RunConfig):
    n_list = parse_grid(cfg.args.n, integer=True)
    if n_list[0] < 1:
        raise ConfigError("--n values must be positive")
    rep = tb.gap_scan(cfg.game, n_list, cfg.mode, cfg.args.pairing, cfg.tol)
    _emit(cfg, rep.columns(), rep.rows(), rep.header())


def cmd_estimates(cfg: RunConfig):
    a, g = cfg.args, cfg.game
    Ts = parse_grid(a.T)
    lams = parse_grid(a.lam)
    rs = parse_grid(a.r)
    fracs = parse_grid(a.frac)
    if min(rs) <= 1 or max(rs) > 2:
        raise ConfigError("--r values must lie in (1, 2]")
    if min(Ts) <= 0 or min(lams) <= 0 or min(fracs) <= 0:
        raise ConfigError("T, lambda and frac values must be positive")
    rows, failures = [], []
    for T in Ts:
        for r in rs:
            m = tb.check_horizon_estimate(g, T, r, cfg.mode)
            ok = m >= 0
            rows.append(["horizon", format_float(T), format_float(r), format_float(2 * (r - 1)), format_float(m), _status(ok)])
            if not ok:
                failures.append(f"horizon T={T!r} r={r!r} margin={m!r}")
    for lam in lams:
        for r in rs:
            m = tb.check_discount_estimate(g, lam, r, cfg.tol, cfg.mode)
            ok = m >= -2 * cfg.tol
            rows.append(["discount", format_float(lam), format_float(r), format_float(2 * (r - 1)), format_float(m), _status(ok)])
            if not ok:
                failures.append(f"discount lambda={lam!r} r={r!r} margin={m!r}")
    for T in fracs:
        m = tb.check_discretization_bound(g, T, cfg.mode)
        ok = m >= 0
        bound = 2 * (math.ceil(T) - T) / T
        rows.append(["discretization", format_float(T), "", format_float(bound), format_float(m), _status(ok)])
        if not ok:
            failures.append(f"discretization T={T!r} margin={m!r}")
    _emit(cfg, ["check", "parameter", "r", "bound", "margin", "status"], rows, f"# {g.name} mode={cfg.mode_name}")
    if failures:
        raise InvariantFailure("; ".join(failures))


def cmd_dpp(cfg: RunConfig):
    a, g, mode = cfg.args, cfg.game, cfg.mode
    if a.n_max < 2 or a.h_max < 1:
        raise ConfigError("--n-max must be >= 2 and --h-max >= 1")
    rows, failures = [], []

    def record(check, param, value, bound):
        ok = value <= bound
        rows.append([check, param, format_float(value), format_float(bound), _status(ok)])
        if not ok:
            failures.append(f"{check} {param} value={value!r} bound={bound!r}")

    res, where = tb.dpp_composition_residual(g, a.n_max, a.h_max, mode)
    at = f"n={where[0]} h={where[1]}" if where else "-"
    record("horizon-composition", f"n_max={a.n_max} h_max={a.h_max} worst_at={at}", res, a.atol)

    V = finite_horizon_values(g, a.n_max, mode)
    family = {n: V[n - 1] for n in range(1, a.n_max + 1)}
    hs = range(1, a.h_max + 1)
    for kind in ("sub", "super"):
        v = tb.check_subsolution(g, family, hs, 0.0, "horizon", kind, mode)
        record(f"horizon-{kind}solution", f"n_max={a.n_max}", v, a.atol)

    for mu in parse_grid(a.mu):
        if not 0 < mu < 1:
            raise ConfigError("--mu values must lie in (0, 1)")
        res = tb.discount_propagation_residual(g, mu, a.h_max, cfg.tol, mode)
        record("discount-propagation", f"mu={format_float(mu)}", res, cfg.tol * ((1 - mu) / mu + 1) + a.atol)
        W, _ = discounted_values(g, mu, cfg.tol, mode)
        lam = -math.log1p(-mu)
        for kind in ("sub", "super"):
            v = tb.check_subsolution(g, {lam: W}, hs, 0.0, "discount", kind, mode)
            record(f"discount-{kind}solution", f"mu={format_float(mu)}", v, cfg.tol * ((1 - mu) / mu + 1) + a.atol)
    _emit(cfg, ["check", "parameter", "value", "bound", "status"], rows, f"# {g.name} mode={cfg.mode_name}")
    if failures:
        raise InvariantFailure("; ".join(failures))


def cmd_oracle(cfg: RunConfig):
    a, g = cfg.args, cfg.game
    if cfg.mode_name != "pure":
        raise ConfigError("the enumeration oracle covers pure (sequential-move) play only")
    ns = parse_grid(a.n, integer=True)
    if ns[0] < 1:
        raise ConfigError("--n values must be positive")
    V = finite_horizon_values(g, ns[-1], cfg.mode)
    rows, worst, failures = [], 0.0, []
    for n in ns:
        B = brute_force_value(g, n, a.cap)
        for s, dp, bf in zip(g.states, V[n - 1].values, B.values):
            d = abs(dp - bf)
            worst = max(worst, d)
            rows.append([str(n), s, format_float(dp), format_float(bf), format_float(d)])
            if d > a.atol:
                failures.append(f"n={n} state={s} discrepancy={d!r}")
    _emit(cfg, ["n", "state", "dp", "oracle", "discrepancy"], rows, f"# {g.name}")
    verdict = "PASS" if not failures else "FAIL"
    sys.stderr.write(f"{verdict}, max discrepancy {worst!r} (tolerance {a.atol!r})\n")
    if failures:
        raise InvariantFailure("; ".join(failures))


COMMANDS = {
    "validate": cmd_validate,
    "solve": cmd_solve,
    "scan": cmd_scan,
    "estimates": cmd_estimates,
    "dpp": cmd_dpp,
    "oracle": cmd_oracle,
}


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(f"error: {kind}: {message}\n")
    return code


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not (args.tol > 0 and args.lp_tol > 0):
            raise ConfigError("tolerances must be positive")
        game = _load_input(args)
        cfg = RunConfig(args.command, game, args.mode, args.tol, args.lp_tol, args)
        COMMANDS[args.command](cfg)
    except ConfigError as exc:
        return _fail("config", str(exc), EXIT_CONFIG)
    except GameValidationError as exc:
        return _fail("validation", str(exc), EXIT_VALIDATION)
    except OracleCapExceeded as exc:
        return _fail("cap", f"{exc} (required={exc.required})", EXIT_CAP)
    except (InvariantFailure, ConvergenceError, LPError) as exc:
        return _fail("invariant", str(exc), EXIT_INVARIANT)
    except OSError as exc:
        return _fail("config", f"{exc.filename}: {exc.strerror}", EXIT_CONFIG)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
