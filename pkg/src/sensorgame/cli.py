"""Command-line front end.

Exit codes: 0 completed (a missing equilibrium is a result, not a failure),
1 input error, 2 guard or limit exceeded, 3 internal invariant failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    GuardExceededError,
    InfeasiblePartitionError,
    InvariantError,
    SensorGameError,
    SimulationError,
    TopologyError,
    UnsupportedPredictionError,
)
from .game import (
    GameInstance,
    brute_force_size,
    payoff,
    pure_nash_all,
    saddle_check,
    stackelberg_bruteforce,
    stackelberg_tree,
)
from .platoon import (
    dc_matrix,
    leader_placement_sweep,
    load_scenario,
    platoon_game,
    platoon_ne_prediction,
    sweep_to_csv,
)
from .recipes import RECIPES
from .simulator import SimConfig, frequency_response, log_grid, response_to_csv, simulate_platoon
from .spectral import closed_form_directed, closed_form_undirected, numeric_kernel
from .topology import load_network, validate_tree

EXIT_OK, EXIT_INPUT, EXIT_GUARD, EXIT_INTERNAL = 0, 1, 2, 3


class Run:
    """Collects output files for one command and writes them with a manifest."""

    def __init__(self, args: argparse.Namespace, inputs: list[str], params: dict):
        self.out = Path(args.out)
        self.command = args.command
        self.seed = getattr(args, "seed", None)
        self.inputs = inputs
        self.params = params
        self.files: dict[str, str] = {}

    def emit(self, name: str, text: str) -> None:
        self.files[name] = text

    def write(self) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        digests = {}
        for name, text in sorted(self.files.items()):
            data = text.encode("utf-8")
            (self.out / name).write_bytes(data)
            digests[name] = hashlib.sha256(data).hexdigest()
        manifest = {
            "command": self.command,
            "inputs": {p: _digest_file(p) for p in self.inputs},
            "seed": self.seed,
            "parameters": self.params,
            "version": __version__,
            "outputs": digests,
        }
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _digest_file(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def cmd_kernel(args) -> int:
    net = load_network(args.network)
    method = args.method
    run = Run(args, [args.network], {"method": method})
    if method == "all":
        methods = ["numeric"]
        if validate_tree(net):
            methods.append("lemma3" if net.directed else "lemma2")
    else:
        methods = [method]
    kernels = {}
    for m in methods:
        if m == "numeric":
            k = numeric_kernel(net)
        elif m in ("lemma2", "lemma3"):
            if not validate_tree(net):
                raise TopologyError(f"method {m} needs a tree; this network is not one")
            if (m == "lemma2") == net.directed:
                raise TopologyError(f"method {m} does not apply to a {net.mode} network")
            k = closed_form_directed(net) if net.directed else closed_form_undirected(net)
        else:
            raise TopologyError(f"unknown method {m!r}")
        kernels[m] = k
        run.emit(f"kernel_{m}.csv", k.to_csv())
        run.emit(f"kernel_{m}.json", k.to_json())
        print(f"{m}: {k.size}x{k.size} kernel, order {list(k.follower_order)}")
    if len(kernels) > 1:
        ref = kernels["numeric"]
        worst = max(
            float(np.max(np.abs(k.reordered(ref.follower_order).inv - ref.inv)))
            for m, k in kernels.items() if m != "numeric"
        )
        line = f"max_discrepancy {_fmt(worst)}"
        run.emit("discrepancy.txt", line + "\n")
        print(line)
        if worst > 1e-9:
            run.write()
            raise InvariantError(f"closed form disagrees with numeric inverse by {worst}")
    run.write()
    return EXIT_OK


def _solve(game: GameInstance, solver: str, net=None) -> dict:
    if solver == "ne":
        rep = pure_nash_all(game)
        if rep is None:
            return {
                "kind": "pure_nash",
                "ne_exists": False,
                "value": None,
                "strategies": [],
                "certified_by": "saddle_check",
                "evaluations": brute_force_size(game),
                "order": list(game.kernel.follower_order),
            }
        return {**rep.to_dict(), "ne_exists": True}
    if solver == "stackelberg-brute":
        return stackelberg_bruteforce(game).to_dict()
    if solver == "stackelberg-tree":
        if net is None or not validate_tree(net):
            raise TopologyError("stackelberg-tree needs a tree network")
        return stackelberg_tree(game, net).to_dict()
    raise TopologyError(f"unknown solver {solver!r}")


def _summary(rep: dict) -> str:
    if rep.get("ne_exists") is False:
        return f"no pure NE ({rep['evaluations']} evaluations, {rep['certified_by']})"
    lines = [f"{rep['kind']} value {_fmt(rep['value'])} ({rep['evaluations']} evaluations, {rep['certified_by']})"]
    order = rep["order"]
    for s in rep["strategies"]:
        det = [order[a] for a in s["detector"]]
        att = [order[a] for a in s["attacker"]]
        lines.append(f"  detector nodes {det}  attacker nodes {att}")
    return "\n".join(lines)


def cmd_solve(args) -> int:
    net = load_network(args.network)
    if validate_tree(net):
        kernel = closed_form_directed(net) if net.directed else closed_form_undirected(net)
    else:
        kernel = numeric_kernel(net)
    if not 1 <= args.f <= kernel.size:
        raise InfeasiblePartitionError(f"f={args.f} must lie in [1, {kernel.size}]")
    game = GameInstance(kernel, args.f)
    rep = _solve(game, args.solver, net)
    run = Run(args, [args.network], {"f": args.f, "solver": args.solver})
    run.emit("report.json", _dump(rep))
    run.write()
    print(_summary(rep))
    return EXIT_OK


def cmd_reproduce(args) -> int:
    if args.recipe not in RECIPES:
        raise TopologyError(f"unknown recipe {args.recipe!r}; choose from {sorted(RECIPES)}")
    kwargs = {"seed": args.seed}
    if args.count is not None:
        kwargs["count"] = args.count
    if args.max_n is not None:
        kwargs["max_n"] = args.max_n
    res = RECIPES[args.recipe](**kwargs)
    run = Run(args, [], {"recipe": args.recipe, **kwargs})
    run.emit("report.csv", res.to_csv())
    run.emit("summary.json", res.summary_json())
    run.write()
    s = res.summary()
    print(f"{s['recipe']}: {s['passed']}/{s['total']} {s['status']}  worst discrepancy {_fmt(s['worst_discrepancy'])}")
    return EXIT_OK if res.ok else EXIT_INTERNAL


def _node_list(text: str | None) -> list[int] | None:
    if text is None:
        return None
    return [int(x) for x in text.split(",") if x.strip()]


def cmd_platoon(args) -> int:
    scn = load_scenario(args.scenario)
    params = {"f": args.f, "action": args.action, "scenario": scn.to_dict()}
    run = Run(args, [args.scenario], params)
    if args.action == "game":
        game = platoon_game(scn, args.f)
        order = game.kernel.follower_order
        net = scn.network()
        rep = {"stackelberg": stackelberg_tree(game, net).to_dict()}
        if brute_force_size(game) <= 10**7:
            rep["pure_nash"] = _solve(game, "ne")
        if args.predict and not scn.leader_at_end:
            raise UnsupportedPredictionError("no equilibrium prediction for an interior leader")
        if scn.leader_at_end:
            pair = platoon_ne_prediction(scn, args.f)
            rep["prediction"] = {
                **pair.to_dict(),
                "value": float(_fmt(payoff(game, pair))),
                "saddle": saddle_check(game, pair),
            }
            print(
                f"predicted NE: attacker nodes {[order[a] for a in pair.attacker]}, "
                f"detector nodes {[order[a] for a in pair.detector]}, "
                f"value {_fmt(payoff(game, pair))}, saddle {'ok' if rep['prediction']['saddle'] else 'FAILED'}"
            )
        print(_summary(rep["stackelberg"]))
        run.emit("report.json", _dump(rep))
    elif args.action == "sweep":
        rows = leader_placement_sweep(scn.n, args.f, scn.mode, scn.k_p)
        run.emit("sweep.csv", sweep_to_csv(rows))
        for r in rows:
            print(f"leader {r.leader_position}: J* {_fmt(r.value)}  ne {r.ne_exists}  boundary_ok {r.boundary_ok}")
    elif args.action == "simulate":
        attackers = _node_list(args.attackers)
        detectors = _node_list(args.detectors)
        if attackers is None or detectors is None:
            game = platoon_game(scn, args.f)
            order = game.kernel.follower_order
            pair = stackelberg_tree(game, scn.network()).strategies[0]
            attackers = attackers or [order[a] for a in pair.attacker]
            detectors = detectors or [order[a] for a in pair.detector]
        w = [args.w] * len(attackers)
        cfg = SimConfig(args.dt, args.horizon, reference_u=args.reference_u, record_every=args.record_every)
        traj = simulate_platoon(scn, attackers, detectors, w, cfg)
        expected = dc_matrix(scn, attackers, detectors) @ np.asarray(w)
        check = {
            "attackers": attackers,
            "detectors": detectors,
            "w": args.w,
            "expected_dc_deviation": [float(_fmt(x)) for x in expected],
            "position_deviation": [float(_fmt(x)) for x in traj.extras["position_deviation"]],
            "velocity_deviation": [float(_fmt(x)) for x in traj.extras["velocity_deviation"]],
            "settled_at": float(_fmt(traj.t[-1])),
        }
        err = float(np.max(np.abs(traj.extras["position_deviation"] - expected)))
        check["max_position_error"] = float(_fmt(err))
        run.emit("trajectory.csv", traj.to_csv())
        run.emit("dc_check.json", _dump(check))
        print(
            f"dc-check: expected {check['expected_dc_deviation']} position deviation "
            f"{check['position_deviation']} velocity deviation {check['velocity_deviation']} "
            f"max error {_fmt(err)}"
        )
        params.update(
            attackers=attackers, detectors=detectors, w=args.w,
            dt=args.dt, horizon=args.horizon, reference_u=args.reference_u,
        )
    run.write()
    return EXIT_OK


def cmd_response(args) -> int:
    net = load_network(args.network)
    attackers = _node_list(args.attackers)
    detectors = _node_list(args.detectors)
    if not attackers or not detectors:
        raise TopologyError("--attackers and --detectors are required")
    if args.points is not None:
        omegas = np.logspace(math.log10(args.omega_min), math.log10(args.omega_max), args.points)
    else:
        omegas = log_grid(args.omega_min, args.omega_max)
    resp = frequency_response(net, attackers, detectors, omegas)
    run = Run(args, [args.network], {
        "attackers": attackers, "detectors": detectors,
        "omega_min": args.omega_min, "omega_max": args.omega_max, "points": len(omegas),
    })
    run.emit("response.csv", response_to_csv(resp))
    run.write()
    gains = [g for _, g in resp]
    peak = int(np.argmax(gains))
    print(f"peak gain {_fmt(gains[peak])} at omega {_fmt(resp[peak][0])} (index {peak} of {len(resp)})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sensorgame", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel", help="grounded-Laplacian inverse of a network")
    p.add_argument("--network", required=True)
    p.add_argument("--method", default="all", choices=["numeric", "lemma2", "lemma3", "all"])
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("solve", help="equilibria of the placement game")
    p.add_argument("--network", required=True)
    p.add_argument("--f", type=int, required=True)
    p.add_argument("--solver", default="stackelberg-tree", choices=["ne", "stackelberg-brute", "stackelberg-tree"])
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("reproduce", help="run one reproduction sweep")
    p.add_argument("--recipe", required=True, help=", ".join(RECIPES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=None, help="number of random samples")
    p.add_argument("--max-n", type=int, default=None, help="largest network size")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("platoon", help="platoon game, leader sweep or simulation")
    p.add_argument("--scenario", required=True)
    p.add_argument("--f", type=int, default=1)
    p.add_argument("--action", default="game", choices=["game", "sweep", "simulate"])
    p.add_argument("--predict", action="store_true", help="require an equilibrium prediction")
    p.add_argument("--attackers", help="comma-separated vehicle indices")
    p.add_argument("--detectors", help="comma-separated vehicle indices")
    p.add_argument("--w", type=float, default=1.0, help="constant attack amplitude")
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--reference-u", type=float, default=20.0, help="leader speed")
    p.add_argument("--record-every", type=int, default=50)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_platoon)

    p = sub.add_parser("response", help="frequency sweep of the first-order attack-to-sensor gain")
    p.add_argument("--network", required=True)
    p.add_argument("--attackers", required=True)
    p.add_argument("--detectors", required=True)
    p.add_argument("--omega-min", type=float, default=1e-3)
    p.add_argument("--omega-max", type=float, default=1e3)
    p.add_argument("--points", type=int, default=None, help="default: 61 per decade")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_response)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; 2 is reserved for the guard here
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except GuardExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (InvariantError, SimulationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (SensorGameError, ValueError, IndexError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
