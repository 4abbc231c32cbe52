"""Parameter sweeps comparing the pricing schemes over seeded scenarios.

A sweep spec is a TOML file::

    [sweep]
    parameter = "loading_weight"   # capacity_mean | fleet_size | loading_weight | degradation_weight
    values = [0.1, 0.3, 0.5]
    seeds = 20                      # an int means range(seeds); a list is used as is
    schemes = ["proposed", "price_minimized", "random"]
    scenario = "base.toml"          # optional, relative to the spec; default is the built-in reference

    [fleet_spec]                    # optional overrides merged into the base fleet_spec
    capacity_mean = 20.0
"""

from __future__ import annotations

import copy
import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .baselines import PRICE_MINIMIZED, RANDOM, solve_price_minimized, solve_random
from .leader import FEASIBILITY_TOL, solve_equilibrium
from .model import Scenario, ScenarioError, loads_document, reference_document, scenario_from_dict

PROPOSED = "proposed"
SCHEMES = (PROPOSED, PRICE_MINIMIZED, RANDOM)
PARAMETERS = ("capacity_mean", "fleet_size", "loading_weight", "degradation_weight")


def fmt(x) -> str:
    """Numbers in CSV output: 9 significant digits, empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.9g}"


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple[float, ...]
    seeds: tuple[int, ...]
    schemes: tuple[str, ...] = SCHEMES
    base: Mapping = field(default_factory=reference_document, compare=False, repr=False)

    def __post_init__(self):
        if self.parameter not in PARAMETERS:
            raise ScenarioError(f"unknown parameter {self.parameter!r}, expected one of {PARAMETERS}",
                                "sweep.parameter")
        if not self.values:
            raise ScenarioError("empty value list", "sweep.values")
        if not self.seeds:
            raise ScenarioError("at least one seed required", "sweep.seeds")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad or not self.schemes:
            raise ScenarioError(f"unknown schemes {bad}", "sweep.schemes")
        if self.parameter in ("capacity_mean", "fleet_size") and "fleet_spec" not in self.base:
            raise ScenarioError(f"sweeping {self.parameter} needs a [fleet_spec] base", "sweep.scenario")
        if self.parameter == "fleet_size" and any(int(v) != v or v < 1 for v in self.values):
            raise ScenarioError("fleet_size multipliers must be positive integers", "sweep.values")

    def scenario(self, value: float, seed: int) -> Scenario:
        """The scenario behind one sweep point."""
        doc = copy.deepcopy(dict(self.base))
        fs = doc.get("fleet_spec")
        if self.parameter == "capacity_mean":
            fs["capacity_mean"] = float(value)
        elif self.parameter == "fleet_size":
            fs["pair_counts"] = [{**p, "count": int(p["count"]) * int(value)} for p in fs["pair_counts"]]
        elif self.parameter == "loading_weight":
            doc.setdefault("weights", {})["loading"] = float(value)
        elif fs is not None:
            fs["degradation_weight"] = float(value)
        else:
            doc["fleet"] = [{**a, "degradation_weight": float(value)} for a in doc["fleet"]]
        return scenario_from_dict(doc, seed if fs is not None else None)


def load_sweep_spec(path: str | Path) -> SweepSpec:
    path = Path(path)
    try:
        doc = loads_document(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from exc
    return sweep_spec_from_dict(doc, path.parent)


def sweep_spec_from_dict(doc: Mapping, root: Path = Path(".")) -> SweepSpec:
    sw = doc.get("sweep")
    if sw is None:
        raise ScenarioError("missing [sweep] table", "sweep")
    if "scenario" in sw:
        base = loads_document((root / sw["scenario"]).read_text(encoding="utf-8"))
    else:
        base = reference_document()
    if "fleet_spec" in doc:
        if "fleet_spec" not in base:
            raise ScenarioError("fleet_spec overrides need a generated base fleet", "fleet_spec")
        base["fleet_spec"].update(doc["fleet_spec"])
    if "weights" in doc:
        base.setdefault("weights", {}).update(doc["weights"])
    seeds = sw.get("seeds", 10)
    seeds = tuple(range(seeds)) if isinstance(seeds, int) else tuple(int(s) for s in seeds)
    try:
        values = tuple(float(v) for v in sw["values"])
        parameter = sw["parameter"]
    except KeyError as exc:
        raise ScenarioError("missing field", f"sweep.{exc.args[0]}") from exc
    return SweepSpec(parameter=parameter, values=values, seeds=seeds,
                     schemes=tuple(sw.get("schemes", SCHEMES)), base=base)


@dataclass(frozen=True)
class SweepRow:
    value: float
    seed: int
    scheme: str
    feasible: bool
    price: float | None
    pso_utility: float | None
    loads: tuple[float | None, ...]
    at_demand_max: tuple[str, ...]


@dataclass(frozen=True)
class SweepSeries:
    parameter: str
    lcs_ids: tuple[str, ...]
    rows: tuple[SweepRow, ...]

    def aggregate(self) -> list[dict]:
        """Mean over seeds of the feasible rows, one entry per (value, scheme)."""
        out = []
        keys = []
        for r in self.rows:
            if (r.value, r.scheme) not in keys:
                keys.append((r.value, r.scheme))
        for value, scheme in keys:
            group = [r for r in self.rows if r.value == value and r.scheme == scheme]
            ok = [r for r in group if r.feasible]
            entry = {
                "value": value,
                "scheme": scheme,
                "n_seeds": len(group),
                "n_feasible": len(ok),
                "mean_price": float(np.mean([r.price for r in ok])) if ok else None,
                "mean_pso_utility": float(np.mean([r.pso_utility for r in ok])) if ok else None,
                "frac_at_demand_max": (sum(bool(r.at_demand_max) for r in ok) / len(ok)) if ok else None,
            }
            for n, lid in enumerate(self.lcs_ids):
                entry[f"mean_load_{lid}"] = float(np.mean([r.loads[n] for r in ok])) if ok else None
            out.append(entry)
        return out

    def means(self, scheme: str = PROPOSED) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(values, mean price, mean utility) for one scheme."""
        agg = [a for a in self.aggregate() if a["scheme"] == scheme]
        return (np.array([a["value"] for a in agg]),
                np.array([a["mean_price"] for a in agg], dtype=float),
                np.array([a["mean_pso_utility"] for a in agg], dtype=float))

    def saturation_onset(self, scheme: str = PROPOSED) -> float | None:
        """First swept value from which every feasible seed has an LCS at its demand cap."""
        agg = [a for a in self.aggregate() if a["scheme"] == scheme]
        onset = None
        for a in agg:
            if a["frac_at_demand_max"] == 1.0:
                if onset is None:
                    onset = a["value"]
            else:
                onset = None
        return onset

    def rows_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([self.parameter, "seed", "scheme", "status", "price", "pso_utility",
                    *(f"load_{l}" for l in self.lcs_ids), "at_demand_max"])
        for r in self.rows:
            w.writerow([fmt(r.value), r.seed, r.scheme, "feasible" if r.feasible else "infeasible",
                        fmt(r.price), fmt(r.pso_utility), *(fmt(x) for x in r.loads),
                        ";".join(r.at_demand_max)])
        return buf.getvalue()

    def aggregate_csv(self) -> str:
        agg = self.aggregate()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = list(agg[0].keys()) if agg else []
        w.writerow([self.parameter if h == "value" else h for h in header])
        for a in agg:
            w.writerow([a[h] if h == "scheme" else fmt(a[h]) for h in header])
        return buf.getvalue()

    def write(self, path: str | Path) -> tuple[Path, Path]:
        """Write the per-seed rows to ``path`` and the means to ``<stem>_mean<suffix>``."""
        path = Path(path)
        mean_path = path.with_name(f"{path.stem}_mean{path.suffix or '.csv'}")
        path.write_text(self.rows_csv(), encoding="utf-8", newline="")
        mean_path.write_text(self.aggregate_csv(), encoding="utf-8", newline="")
        return path, mean_path


def _rows_for_point(task: tuple[SweepSpec, float, int]) -> list[SweepRow]:
    spec, value, seed = task
    scenario = spec.scenario(value, seed)
    rows = []
    for scheme in spec.schemes:
        if scheme == PROPOSED:
            res = solve_equilibrium(scenario)
            price, util, feasible = res.p_star, res.pso_utility, res.feasible
            e = np.array(res.e_star) if feasible else None
        else:
            res = solve_price_minimized(scenario) if scheme == PRICE_MINIMIZED else solve_random(scenario, seed)
            price, util, feasible = res.p, res.pso_utility, res.feasible
            e = np.array(res.e) if feasible else None
        if feasible:
            loads = np.bincount(scenario.arrays.lcs_index, weights=e, minlength=len(scenario.lcs))
            capped = tuple(l.id for l, x in zip(scenario.lcs, loads)
                           if x >= l.demand_max - FEASIBILITY_TOL)
            loads = tuple(float(x) for x in loads)
        else:
            loads = (None,) * len(scenario.lcs)
            capped = ()
        rows.append(SweepRow(value, seed, scheme, feasible, price, util, loads, capped))
    return rows


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepSeries:
    """Evaluate every (value, seed) point; row order does not depend on ``jobs``."""
    tasks = [(spec, v, s) for v in spec.values for s in spec.seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_rows_for_point, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        chunks = [_rows_for_point(t) for t in tasks]
    lcs_ids = tuple(l.id for l in spec.scenario(spec.values[0], spec.seeds[0]).lcs)
    return SweepSeries(spec.parameter, lcs_ids, tuple(r for chunk in chunks for r in chunk))


def default_spec(parameter: str, values: Sequence[float] | None = None,
                 seeds: Iterable[int] = range(20), schemes: Sequence[str] = SCHEMES) -> SweepSpec:
    """Built-in sweep grids on the two-RCS, two-LCS reference setting.

    The loading-weight sweep raises the mean service capacity to 20 kWh so
    that L1's 13 agents can reach its 200 kWh cap.
    """
    defaults = {
        "capacity_mean": (10.0, 12.0, 14.0, 16.0, 18.0, 20.0),
        "fleet_size": (1, 2, 3),
        "loading_weight": (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9),
        "degradation_weight": (2e4, 5e4, 1e5, 2e5, 5e5),
    }
    base = reference_document()
    if parameter == "loading_weight":
        base["fleet_spec"]["capacity_mean"] = 20.0
    return SweepSpec(parameter=parameter, values=tuple(values or defaults.get(parameter, ())),
                     seeds=tuple(seeds), schemes=tuple(schemes), base=base)


__all__ = [
    "PARAMETERS", "PROPOSED", "SCHEMES", "SweepRow", "SweepSeries", "SweepSpec",
    "default_spec", "fmt", "load_sweep_spec", "run_sweep", "sweep_spec_from_dict",
]
