"""Command-line front end.

    mesgame solve --scenario reference.toml [--seed N] [--out mes.csv] [--oracle]
    mesgame compare --scenario reference.toml --seed N [--out schemes.csv]
    mesgame sweep SPEC.toml --out series.csv [--jobs N]
    mesgame oracle-check --scenario reference.toml [--grid-step 1e-4]

Exit codes: 0 feasible, 2 infeasible, 3 input error, 1 oracle disagreement.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from .baselines import solve_price_minimized, solve_random
from .leader import EquilibriumResult, solve_equilibrium
from .model import Scenario, ScenarioError, load_scenario
from .sweep import fmt, load_sweep_spec, run_sweep
from .verify import GridSpec, brute_equilibrium

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INFEASIBLE = 2
EXIT_INPUT = 3


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8", newline="")


def _scenario_paths(path: str) -> list[Path]:
    p = Path(path)
    if p.is_dir():
        # one file per time slot, solved independently
        paths = sorted(p.glob("*.toml"))
        if not paths:
            raise ScenarioError(f"no *.toml scenarios in {p}")
        return paths
    return [p]


def _oracle_comparison(scenario: Scenario, res: EquilibriumResult, step: float) -> tuple[str, bool]:
    oracle = brute_equilibrium(scenario, GridSpec(p_step=step))
    if not res.feasible or not oracle.feasible:
        # a grid can miss a thin feasible window, never invent one
        agree = res.feasible or not oracle.feasible
        return (f"oracle: feasible={oracle.feasible} solver: feasible={res.feasible}", agree)
    du = res.pso_utility - oracle.utility
    dp = abs(res.p_star - oracle.p)
    agree = du >= -1e-6
    lines = [
        f"oracle price      {fmt(oracle.p)}  (grid step {fmt(step)}, {oracle.n_points} points)",
        f"oracle utility    {fmt(oracle.utility)}",
        f"price deviation   {fmt(dp)}",
        f"utility gain      {fmt(du)}",
    ]
    return "\n".join(lines), agree


def _render(scenario: Scenario, res: EquilibriumResult, label: str) -> str:
    lines = [f"scenario {label}: {res.status}"]
    if not res.feasible:
        for name, v in res.violations.items():
            lines.append(f"  violated {name}  ({fmt(v)})")
        return "\n".join(lines)
    lines += [
        f"price             {fmt(res.p_star)}",
        f"pso utility       {fmt(res.pso_utility)}",
        f"interval          {res.interval + 1} of {res.n_intervals}",
    ]
    for l in scenario.lcs:
        lines.append(f"  {l.id} load  {fmt(res.lcs_loads[l.id])}  in [{fmt(l.demand_min)}, {fmt(l.demand_max)}]")
    for r in scenario.rcs:
        lines.append(f"  {r.id} draw  {fmt(res.rcs_draws[r.id])}  <= {fmt(r.surplus_energy)}")
    lines.append("  mes  route  energy  utility  participates")
    for a, e, u, ok in zip(scenario.fleet, res.e_star, res.mes_utilities, res.participation):
        lines.append(f"  {a.id}  {a.rcs}->{a.lcs}  {fmt(e)}  {fmt(u)}  {'yes' if ok else 'no'}")
    return "\n".join(lines)


def _mes_csv(scenario: Scenario, res: EquilibriumResult, slot: str, writer) -> None:
    for a, e, u, ok in zip(scenario.fleet, res.e_star, res.mes_utilities, res.participation):
        writer.writerow([slot, a.id, a.rcs, a.lcs, fmt(res.p_star), fmt(e), fmt(u), int(ok)])


def cmd_solve(args) -> int:
    code = EXIT_OK
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["scenario", "mes", "rcs", "lcs", "price", "energy", "utility", "participates"])
    for path in _scenario_paths(args.scenario):
        scenario = load_scenario(path, seed=args.seed)
        res = solve_equilibrium(scenario)
        print(_render(scenario, res, path.name))
        if res.feasible:
            _mes_csv(scenario, res, path.stem, writer)
        else:
            code = max(code, EXIT_INFEASIBLE)
        if args.oracle:
            text, agree = _oracle_comparison(scenario, res, args.grid_step)
            print(text)
            if not agree and code == EXIT_OK:
                code = EXIT_MISMATCH
    _write(args.out, buf.getvalue())
    return code


def compare_rows(scenario: Scenario, seed: int) -> list[list[str]]:
    prop = solve_equilibrium(scenario)
    rows = []
    lcs_index = scenario.arrays.lcs_index
    for scheme, feasible, p, util, e in [
        ("proposed", prop.feasible, prop.p_star, prop.pso_utility, prop.e_star),
        *[(r.scheme, r.feasible, r.p, r.pso_utility, r.e)
          for r in (solve_price_minimized(scenario), solve_random(scenario, seed))],
    ]:
        if feasible:
            loads = np.bincount(lcs_index, weights=np.array(e), minlength=len(scenario.lcs))
            cells = [fmt(x) for x in loads]
        else:
            cells = [""] * len(scenario.lcs)
        rows.append([scheme, "feasible" if feasible else "infeasible", fmt(p), fmt(util), *cells])
    return rows


def cmd_compare(args) -> int:
    scenario = load_scenario(args.scenario, seed=args.seed)
    header = ["scheme", "status", "price", "pso_utility", *(f"load_{l.id}" for l in scenario.lcs)]
    rows = compare_rows(scenario, args.seed if args.seed is not None else 0)
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows([header, *rows])
    sys.stdout.write(buf.getvalue())
    _write(args.out, buf.getvalue())
    return EXIT_OK if rows[0][1] == "feasible" else EXIT_INFEASIBLE


def cmd_sweep(args) -> int:
    spec = load_sweep_spec(args.spec)
    series = run_sweep(spec, jobs=args.jobs)
    if args.out:
        rows_path, mean_path = series.write(args.out)
        print(f"wrote {rows_path} and {mean_path}")
    else:
        sys.stdout.write(series.rows_csv())
    sys.stdout.write(series.aggregate_csv())
    onset = series.saturation_onset()
    if onset is not None:
        print(f"every feasible seed has an LCS at its demand cap from {spec.parameter} = {fmt(onset)}")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    scenario = load_scenario(args.scenario, seed=args.seed)
    res = solve_equilibrium(scenario)
    text, agree = _oracle_comparison(scenario, res, args.grid_step)
    print(f"solver: {res.status} price {fmt(res.p_star)} utility {fmt(res.pso_utility)}")
    print(text)
    print("agree" if agree else "DISAGREE")
    if not agree:
        return EXIT_MISMATCH
    return EXIT_OK if res.feasible else EXIT_INFEASIBLE


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mesgame", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_args(p):
        p.add_argument("--scenario", required=True, help="scenario TOML (solve also takes a directory)")
        p.add_argument("--seed", type=int, default=None, help="fleet seed, overrides fleet_spec.seed")

    p = sub.add_parser("solve", help="solve the pricing game")
    scenario_args(p)
    p.add_argument("--out", help="per-MES CSV")
    p.add_argument("--oracle", action="store_true", help="also run the brute-force price scan")
    p.add_argument("--grid-step", type=float, default=1e-4)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="proposed vs price-minimized vs random pricing")
    scenario_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="run a parameter sweep spec")
    p.add_argument("spec")
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle-check", help="compare the solver against the price-grid scan")
    scenario_args(p)
    p.add_argument("--grid-step", type=float, default=1e-4)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
