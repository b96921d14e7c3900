"""Command-line interface.

Subcommands mirror the analysis modules::

    dampedchain structure    --input graph.txt
    dampedchain stationary   --input graph.txt --epsilon 0.15
    dampedchain expand       --input graph.txt --order 2 --epsilon-grid 0.05,0.1
    dampedchain bounds       --input graph.txt --epsilon 0.15 --theorem 1
    dampedchain coupling-sim --input graph.txt --epsilon 0.15 --seed 7 --trials 100000
    dampedchain triangular   --input graph.txt --epsilon 0.1 --n-grid 0:30
    dampedchain report       --input graph.txt --epsilon 0.15 --seed 7

Output is a JSON report on stdout (or --out FILE); --plot-data FILE
additionally writes a CSV table suited for plotting. Failures print a
structured error JSON and exit nonzero.
"""

import argparse
import csv
import json
import sys

from .core import DampedChain, DampingVector, Distribution
from .errors import ChainError
from .io import DanglingPolicy, GraphFormat, ingest, load_damping
from .report import (
    bounds_section,
    build_report,
    coupling_sim_section,
    expansion_section,
    serialize,
    spectrum_section,
    stationary_section,
    structure_section,
    triangular_section,
)
from .structure import Regime, decompose

DEFAULT_EPSILON = 0.15
DEFAULT_TRIALS = 100_000
DEFAULT_HORIZON = 30
DEFAULT_TOL = 1e-10

COMMANDS = ("structure", "stationary", "expand", "bounds", "coupling-sim", "triangular", "report")


def _add_common(sub):
    sub.add_argument("--input", required=True, help="path to graph or matrix file")
    sub.add_argument(
        "--format",
        choices=[f.value for f in GraphFormat],
        default=None,
        help="input format (default: guessed from the file extension)",
    )
    sub.add_argument(
        "--damping",
        default="uniform",
        help="'uniform' or a path to a whitespace-separated weights file",
    )
    sub.add_argument(
        "--dangling-policy",
        choices=[p.value for p in DanglingPolicy],
        default=DanglingPolicy.REJECT.value,
        help="what to do with nodes that have no out-links",
    )
    sub.add_argument(
        "--initial",
        default="uniform",
        help="initial distribution: 'uniform', 'point:K' (1-based), or a weights file",
    )
    sub.add_argument("--epsilon", type=float, default=None, help="damping weight in (0, 1]")
    sub.add_argument(
        "--epsilon-grid",
        default=None,
        help="comma-separated damping weights, e.g. 0.05,0.1,0.15",
    )
    sub.add_argument("--order", type=int, default=2, help="expansion order (default 2)")
    sub.add_argument(
        "--coupling-N",
        dest="coupling_n",
        type=int,
        default=2,
        help="block length N for multi-step coupling quantities (default 2)",
    )
    sub.add_argument("--seed", type=int, default=None, help="RNG seed (required for simulation)")
    sub.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    sub.add_argument("--horizon", type=int, default=DEFAULT_HORIZON)
    sub.add_argument("--n-grid", default=None, help="sweep steps: 'a:b[:s]' or comma list")
    sub.add_argument("--theorem", default=None, help="bound families, e.g. '1' or '5,6'")
    sub.add_argument("--tol", type=float, default=DEFAULT_TOL)
    sub.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    sub.add_argument("--plot-data", default=None, help="write a CSV plot table here")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dampedchain",
        description="Perturbation analysis of finite Markov chains with a damping component.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _add_common(subparsers.add_parser(name))
    return parser


def _parse_grid(raw: str):
    if ":" in raw:
        parts = [int(x) for x in raw.split(":")]
        if len(parts) == 2:
            start, stop, step = parts[0], parts[1], 1
        elif len(parts) == 3:
            start, stop, step = parts
        else:
            raise ChainError(f"bad --n-grid {raw!r}; use 'a:b' or 'a:b:s'")
        return list(range(start, stop + 1, step))
    return [int(x) for x in raw.split(",")]


def _initial(spec: str, dim: int) -> Distribution:
    if spec == "uniform":
        return Distribution.uniform(dim)
    if spec.startswith("point:"):
        state = int(spec.split(":", 1)[1])
        return Distribution.point_mass(dim, state - 1)
    weights = load_damping(spec, dim)
    return Distribution(weights.weights)


def _epsilons(args):
    if args.epsilon_grid:
        return [float(x) for x in args.epsilon_grid.split(",")]
    return [args.epsilon if args.epsilon is not None else DEFAULT_EPSILON]


def _load(args):
    fmt = GraphFormat(args.format) if args.format else None
    matrix, damping = ingest(args.input, fmt, DanglingPolicy(args.dangling_policy))
    if args.damping != "uniform":
        damping = load_damping(args.damping, matrix.dim)
    elif damping is None:
        damping = DampingVector.uniform(matrix.dim)
    return matrix, damping


def _inputs_echo(args, matrix, damping, p, epsilons) -> dict:
    return {
        "matrix": [[float(x) for x in row] for row in matrix.entries],
        "damping": [float(x) for x in damping.weights],
        "initial": [float(x) for x in p.probs],
        "epsilon": args.epsilon,
        "epsilon_grid": epsilons if args.epsilon_grid else None,
        "order": args.order,
        "coupling_block": args.coupling_n,
        "seed": args.seed,
        "trials": args.trials,
        "horizon": args.horizon,
        "tolerance": args.tol,
        "dangling_policy": args.dangling_policy,
    }


def _plot_rows(command: str, sections: dict):
    if command in ("bounds", "report") and "bounds" in sections:
        yield ["N", "delta"]
        for item in sections["bounds"]["ergodicity"]:
            yield [item["N"], item["delta"]]
    elif command == "triangular" and "triangular" in sections:
        rows = sections["triangular"]["rows"]
        m = len(rows[0]["trajectory"]) if rows else 0
        header = ["n", "eps_n", "bound"]
        header += [f"trajectory_{k + 1}" for k in range(m)]
        header += [f"mixture_{k + 1}" for k in range(m)]
        header += [f"rel_error_{k + 1}" for k in range(m)]
        yield header
        for row in rows:
            yield [row["n"], row["eps_n"], row["bound"], *row["trajectory"], *row["mixture"], *row["rel_error"]]
    elif command == "coupling-sim" and "coupling_sim" in sections:
        sim = sections["coupling_sim"]
        yield ["n", "tail", "std_error", "onestep_bound"]
        for n, (t, s, b) in enumerate(zip(sim["tail"], sim["std_error"], sim["onestep_bound"])):
            yield [n, t, s, b]
    elif command == "expand" and "expansion" in sections:
        evals = sections["expansion"].get("evaluations", [])
        m = len(sections["expansion"]["base"])
        yield ["epsilon", *[f"value_{k + 1}" for k in range(m)], "mass_defect"]
        for entry in evals:
            yield [entry["epsilon"], *entry["values"], entry["mass_defect"]]
    elif command == "stationary" and "stationary" in sections:
        entries = sections["stationary"]["by_epsilon"]
        m = len(entries[0]["direct"]["pi"]) if entries else 0
        yield ["epsilon", *[f"pi_{k + 1}" for k in range(m)]]
        for entry in entries:
            yield [entry["epsilon"], *entry["direct"]["pi"]]


def run_command(command: str, args) -> dict:
    """Execute one subcommand and return the report as a dict."""
    matrix, damping = _load(args)
    epsilons = _epsilons(args)
    p = _initial(args.initial, matrix.dim)
    chain = DampedChain(matrix, damping, epsilons[0])
    structure = decompose(matrix)
    echo = _inputs_echo(args, matrix, damping, p, epsilons)

    sections = {}
    if command in ("structure", "report"):
        sections["structure"] = structure_section(structure)
    if command in ("stationary", "report"):
        sections["stationary"] = stationary_section(chain, structure, epsilons, args.tol)
    if command in ("expand", "report"):
        sections["spectrum"] = spectrum_section(chain, structure)
        sections["expansion"] = expansion_section(chain, structure, args.order, epsilons)
    if command in ("bounds", "report"):
        if args.theorem:
            families = [x.strip() for x in args.theorem.split(",")]
        elif structure.regime is Regime.REGULAR:
            families = ["1", "5", "6"]
        elif structure.regime is Regime.SINGULAR:
            families = ["2", "5", "6", "7"]
        else:
            families = ["5", "6"]  # coupling bounds need no structural conditions
        sections["bounds"] = bounds_section(
            chain, structure, p, epsilons[0], args.coupling_n, families, args.horizon
        )
    if command in ("coupling-sim", "report"):
        if args.seed is None:
            raise ChainError("--seed is required for the coupling simulation")
        sections["coupling_sim"] = coupling_sim_section(
            chain, p, epsilons[0], args.trials, args.seed, args.horizon
        )
    if command in ("triangular", "report"):
        grid = _parse_grid(args.n_grid) if args.n_grid else list(range(0, args.horizon + 1))
        sections["triangular"] = triangular_section(
            chain, structure, p, epsilons[0], grid, args.coupling_n
        )
    return build_report(command, echo, sections)


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        report = run_command(args.command, args)
    except ChainError as exc:
        error = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        print(json.dumps(error, indent=2))
        return 1

    text = serialize(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)

    if args.plot_data:
        rows = list(_plot_rows(args.command, report))
        if rows:
            with open(args.plot_data, "w", newline="") as fh:
                csv.writer(fh).writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
