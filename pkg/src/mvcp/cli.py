"""Command-line experiment runner.

Subcommands: simulate, sweep, bounds, oracle, verify.

Values come from defaults, then a JSON ``--config`` file, then command-line
flags, later sources winning.  Exit codes: 0 success, 1 a verification
check failed, 2 invalid configuration, 3 internal invariant breach.
"""
from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from typing import IO, Sequence

from . import __version__
from .model import ConfigError, DeathProfile, GraphState, MvcpConfig, MvcpError, read_edge_list, read_infections, seed_infections

EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_INVARIANT = 3

DEFAULTS = {
    "tree": None, "graph": None, "infections": None, "init": "root:1",
    "lam": None, "phi": None, "seed": 0, "horizon": None, "max_events": 10**7,
    "boundary_stop": False, "thin": False, "out": None,
    "d": None, "lambdas": None, "depths": "3,4,5", "replicas": 1000, "workers": None,
    "start": 1, "walk_horizon": 10**4, "quick": False,
}


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True)


def _header(cmd: str, cfg: dict) -> dict:
    return {"header": {"command": cmd, "version": __version__, "config": cfg}}


@contextmanager
def _output(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="\n") as fh:
            yield fh


def _profile(cfg: dict) -> DeathProfile:
    if not cfg.get("phi"):
        raise ConfigError("--phi is required")
    return DeathProfile.parse(cfg["phi"]) if isinstance(cfg["phi"], str) else DeathProfile(tuple(cfg["phi"]))


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


def _ints(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    return [int(x) for x in str(text).split(",") if x.strip()]


def _mvcp_config(cfg: dict) -> MvcpConfig:
    if cfg.get("lam") is None:
        raise ConfigError("--lambda is required")
    return MvcpConfig(float(cfg["lam"]), _profile(cfg))


def _parse_init(text: str) -> dict[int, int]:
    """``root:k`` or ``id:count,id:count``."""
    out = {}
    for tok in text.split(","):
        if not tok.strip():
            continue
        key, _, val = tok.partition(":")
        try:
            out[0 if key.strip() == "root" else int(key)] = int(val)
        except ValueError as exc:
            raise ConfigError(f"bad initial infection {tok!r}") from exc
    return out


def _initial_state(cfg: dict, profile: DeathProfile) -> GraphState:
    from .graphs import build_tree, parse_tree_spec

    if cfg.get("tree"):
        state = build_tree(parse_tree_spec(cfg["tree"]))
    elif cfg.get("graph"):
        try:
            with open(cfg["graph"]) as fh:
                state = read_edge_list(fh)
        except OSError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        raise ConfigError("need --tree or --graph")
    if cfg.get("infections"):
        with open(cfg["infections"]) as fh:
            init = read_infections(fh)
    else:
        init = _parse_init(cfg.get("init") or "")
    for x in init:
        if not 0 <= x < state.n:
            raise ConfigError(f"initial infection on missing vertex {x}")
    return seed_infections(state, init, profile)


# -- subcommands ---------------------------------------------------------------

def cmd_simulate(cfg: dict) -> int:
    from .engine import StopRule, run, write_jsonl

    mc = _mvcp_config(cfg)
    state = _initial_state(cfg, mc.profile)
    stop = StopRule(horizon=cfg.get("horizon"), max_events=cfg.get("max_events"),
                    boundary=bool(cfg.get("boundary_stop")))
    traj = run(state, mc, stop, int(cfg["seed"]), record=not cfg.get("thin"))
    traj.final.check_invariants(mc.profile.cutoff)
    with _output(cfg.get("out")) as fh:
        fh.write(_dumps(_header("simulate", cfg)) + "\n")
        write_jsonl(traj, fh, thin=bool(cfg.get("thin")))
    return 0


def cmd_bounds(cfg: dict) -> int:
    from .bounds import bound_set

    if cfg.get("d") is None:
        raise ConfigError("--d is required")
    bs = bound_set(int(cfg["d"]), _profile(cfg))
    with _output(cfg.get("out")) as fh:
        fh.write(_dumps({**_header("bounds", cfg), "bounds": bs.as_dict()}) + "\n")
    return 0


def cmd_oracle(cfg: dict) -> int:
    from .oracle import WalkSpec, absorption_probability, p_w, simulate_walks

    mc = _mvcp_config(cfg)
    pw = p_w(mc.lam, mc.profile)
    spec = WalkSpec(pw, int(cfg["start"]))
    reps = int(cfg["replicas"])
    absorbed, _, _ = simulate_walks(spec, int(cfg["walk_horizon"]), reps, int(cfg["seed"]))
    report = {"p_w": pw, "absorption_probability": absorption_probability(spec),
              "simulated_absorption": float(absorbed.mean()), "replicas": reps,
              "horizon_jumps": int(cfg["walk_horizon"])}
    with _output(cfg.get("out")) as fh:
        fh.write(_dumps({**_header("oracle", cfg), "oracle": report}) + "\n")
    return 0


def cmd_sweep(cfg: dict) -> int:
    from .analysis import lambda_sweep

    if cfg.get("d") is None or cfg.get("lambdas") is None:
        raise ConfigError("sweep needs --d and --lambdas")
    profile = _profile(cfg)
    lambdas = _floats(cfg["lambdas"])
    if any(x <= 0 for x in lambdas):
        raise ConfigError("lambda values must be positive")
    result = lambda_sweep(int(cfg["d"]), profile, lambdas, _ints(cfg["depths"]),
                          int(cfg["replicas"]), int(cfg["seed"]), cfg.get("workers"))
    with _output(cfg.get("out")) as fh:
        fh.write(f"# {_dumps(_header('sweep', cfg))}\n")
        fh.write(f"# markers {_dumps(result.markers)}\n")
        result.write_csv(fh)
    return 0


def cmd_verify(cfg: dict) -> int:
    from .verify import run_checks

    results = run_checks(quick=bool(cfg.get("quick")), seed=int(cfg["seed"]))
    ok = all(r["passed"] for r in results if r["gating"])
    with _output(cfg.get("out")) as fh:
        fh.write(_dumps(_header("verify", cfg)) + "\n")
        for r in results:
            fh.write(_dumps(r) + "\n")
        fh.write(_dumps({"all_gating_checks_passed": ok}) + "\n")
    return 0 if ok else EXIT_FAILED


COMMANDS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "bounds": cmd_bounds,
            "oracle": cmd_oracle, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mvcp", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *, model=True):
        sp.add_argument("--config", help="JSON file of option values (flags override it)")
        sp.add_argument("--seed", type=int, default=argparse.SUPPRESS)
        sp.add_argument("--out", default=argparse.SUPPRESS, help="output path (default stdout)")
        if model:
            sp.add_argument("--lambda", dest="lam", type=float, default=argparse.SUPPRESS)
            sp.add_argument("--phi", default=argparse.SUPPRESS, help="comma list phi(1),...,phi(M); last must be 1.0")

    sp = sub.add_parser("simulate", help="run one trajectory, write JSON lines")
    common(sp)
    sp.add_argument("--tree", default=argparse.SUPPRESS, help="finite:d:n or regular:d:depth")
    sp.add_argument("--graph", default=argparse.SUPPRESS, help="edge-list file")
    sp.add_argument("--infections", default=argparse.SUPPRESS, help="file of 'id count' lines")
    sp.add_argument("--init", default=argparse.SUPPRESS, help="root:k or id:k,id:k")
    sp.add_argument("--horizon", type=float, default=argparse.SUPPRESS)
    sp.add_argument("--max-events", dest="max_events", type=int, default=argparse.SUPPRESS)
    sp.add_argument("--boundary-stop", dest="boundary_stop", action="store_true", default=argparse.SUPPRESS)
    sp.add_argument("--thin", action="store_true", default=argparse.SUPPRESS, help="summary only")

    sp = sub.add_parser("sweep", help="boundary-hit probability over a lambda grid (CSV)")
    common(sp, model=False)
    sp.add_argument("--phi", default=argparse.SUPPRESS)
    sp.add_argument("--d", type=int, default=argparse.SUPPRESS)
    sp.add_argument("--lambdas", default=argparse.SUPPRESS)
    sp.add_argument("--depths", default=argparse.SUPPRESS)
    sp.add_argument("--replicas", type=int, default=argparse.SUPPRESS)
    sp.add_argument("--workers", type=int, default=argparse.SUPPRESS, help="overrides MVCP_WORKERS")

    sp = sub.add_parser("bounds", help="print the bound set as JSON")
    common(sp, model=False)
    sp.add_argument("--phi", default=argparse.SUPPRESS)
    sp.add_argument("--d", type=int, default=argparse.SUPPRESS)

    sp = sub.add_parser("oracle", help="walk up-probability and absorption as JSON")
    common(sp)
    sp.add_argument("--start", type=int, default=argparse.SUPPRESS)
    sp.add_argument("--replicas", type=int, default=argparse.SUPPRESS)
    sp.add_argument("--horizon", dest="walk_horizon", type=int, default=argparse.SUPPRESS)

    sp = sub.add_parser("verify", help="run the property suite, one JSON line per check")
    common(sp, model=False)
    sp.add_argument("--quick", action="store_true", default=argparse.SUPPRESS)
    return p


def resolve_config(ns: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    path = getattr(ns, "config", None)
    if path:
        try:
            with open(path) as fh:
                cfg.update(json.load(fh))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg.update({k: v for k, v in vars(ns).items() if k not in ("config", "command")})
    return cfg


def main(argv: Sequence[str] | None = None, stderr: IO[str] | None = None) -> int:
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else 0
    try:
        return COMMANDS[ns.command](resolve_config(ns))
    except AssertionError as exc:
        print(f"mvcp: invariant breach: {exc}", file=stderr)
        return EXIT_INVARIANT
    except MvcpError as exc:
        print(f"mvcp: {exc}", file=stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
