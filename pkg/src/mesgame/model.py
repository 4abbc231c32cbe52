"""Domain types for the charging-station group and the on-road MES fleet.

Units: energy in kWh, power in kW, prices are dimensionless scalars per kWh.

Scenario documents are TOML files with the tables ``[weights]``,
``[[rcs]]``, ``[[lcs]]`` and either ``[[fleet]]`` (explicit agents) or
``[fleet_spec]`` (a seeded generator, see :class:`FleetSpec`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import tomli

# Loading-revenue scale: a_j = LOADING_SCALE * D^U_j.
LOADING_SCALE = 5e-4


class ScenarioError(ValueError):
    """Raised when a scenario document is malformed or violates an invariant."""

    def __init__(self, message: str, field_name: str | None = None):
        self.field_name = field_name
        super().__init__(f"{field_name}: {message}" if field_name else message)


def _require(cond: bool, field_name: str, rule: str) -> None:
    if not cond:
        raise ScenarioError(f"violates {rule}", field_name)


@dataclass(frozen=True)
class Rcs:
    """Resourceful charging station: the energy source of the service."""

    id: str
    surplus_energy: float
    charge_power: float

    def __post_init__(self):
        _require(self.surplus_energy >= 0, f"rcs[{self.id}].surplus_energy", "E_i >= 0")
        _require(self.charge_power > 0, f"rcs[{self.id}].charge_power", "P_i > 0")


@dataclass(frozen=True)
class Lcs:
    """Limited-capacity charging station with a demand window [demand_min, demand_max]."""

    id: str
    demand_min: float
    demand_max: float
    discharge_power: float

    def __post_init__(self):
        _require(self.demand_min >= 0, f"lcs[{self.id}].demand_min", "D^L_j >= 0")
        _require(
            self.demand_min <= self.demand_max,
            f"lcs[{self.id}].demand_min",
            "D^L_j <= D^U_j",
        )
        _require(self.discharge_power > 0, f"lcs[{self.id}].discharge_power", "P_j > 0")

    # loading revenue -(a*x - b)**2 + c peaks at x = demand_max with value c
    @property
    def a(self) -> float:
        return LOADING_SCALE * self.demand_max

    @property
    def b(self) -> float:
        return self.a * self.demand_max

    @property
    def c(self) -> float:
        return self.b**2


@dataclass(frozen=True)
class DegradationCurve:
    """Cubic discharging-power degradation ``b1*P**3 + b2*P**2 + b3*P + b4``."""

    b1: float
    b2: float
    b3: float
    b4: float

    def __call__(self, power: float) -> float:
        return power_degradation_factor(self, power)


def power_degradation_factor(curve: DegradationCurve, power: float) -> float:
    if not power > 0:
        raise ScenarioError("discharge power must be positive", "discharge_power")
    value = ((curve.b1 * power + curve.b2) * power + curve.b3) * power + curve.b4
    if not value > 0:
        raise ScenarioError(
            f"degradation curve evaluates to {value!r} at P={power!r}",
            "degradation_curve",
        )
    return value


@dataclass(frozen=True)
class MesAgent:
    """One follower: an on-road PEV travelling from ``rcs`` to ``lcs``."""

    id: str
    rcs: str
    lcs: str
    battery_capacity: float
    initial_soc: float
    time_weight: float = 30.0
    degradation_weight: float = 1e5
    dod_quadratic: float = 1.0
    dod_linear: float = -0.222
    power_degradation: float = 5.08e-4

    def __post_init__(self):
        name = f"fleet[{self.id}]"
        _require(self.battery_capacity > 0, f"{name}.battery_capacity", "B_k > 0")
        _require(
            0 <= self.initial_soc <= self.battery_capacity,
            f"{name}.initial_soc",
            "0 <= e^I_k <= B_k",
        )
        _require(self.time_weight > 0, f"{name}.time_weight", "alpha^T_k > 0")
        _require(self.degradation_weight > 0, f"{name}.degradation_weight", "alpha^D_k > 0")
        _require(self.dod_quadratic > 0, f"{name}.dod_quadratic", "alpha_1 > 0")
        _require(math.isfinite(self.dod_linear), f"{name}.dod_linear", "finite alpha_2")
        _require(self.power_degradation > 0, f"{name}.power_degradation", "D_k > 0")

    @property
    def route(self) -> tuple[str, str]:
        return (self.rcs, self.lcs)

    @property
    def capacity(self) -> float:
        """Spare battery room B_k - e^I_k, the most the agent can deliver."""
        return self.battery_capacity - self.initial_soc


@dataclass(frozen=True)
class FleetArrays:
    """Column view of a fleet, aligned with ``Scenario.fleet``."""

    rcs_index: np.ndarray
    lcs_index: np.ndarray
    rcs_power: np.ndarray
    lcs_power: np.ndarray
    battery: np.ndarray
    capacity: np.ndarray
    time_weight: np.ndarray
    degradation_weight: np.ndarray
    dod_quadratic: np.ndarray
    dod_linear: np.ndarray
    power_degradation: np.ndarray


@dataclass(frozen=True)
class Scenario:
    rcs: tuple[Rcs, ...]
    lcs: tuple[Lcs, ...]
    fleet: tuple[MesAgent, ...]
    loading_weight: float = 0.5
    pair_counts: dict = field(init=False, compare=False, repr=False)
    mean_service_target: float = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "rcs", tuple(self.rcs))
        object.__setattr__(self, "lcs", tuple(self.lcs))
        object.__setattr__(self, "fleet", tuple(self.fleet))
        _require(self.loading_weight >= 0, "weights.loading", "alpha_L >= 0")
        _require(len(self.rcs) > 0, "rcs", "at least one RCS")
        _require(len(self.lcs) > 0, "lcs", "at least one LCS")
        for kind, group in (("rcs", self.rcs), ("lcs", self.lcs), ("fleet", self.fleet)):
            ids = [x.id for x in group]
            _require(len(set(ids)) == len(ids), kind, "unique ids")
        if not self.fleet:
            raise ScenarioError("empty fleet leaves the mean service target undefined", "fleet")
        rcs_ids = {r.id for r in self.rcs}
        lcs_ids = {l.id for l in self.lcs}
        counts: dict[tuple[str, str], int] = {}
        for agent in self.fleet:
            _require(agent.rcs in rcs_ids, f"fleet[{agent.id}].rcs", "references an existing RCS")
            _require(agent.lcs in lcs_ids, f"fleet[{agent.id}].lcs", "references an existing LCS")
            counts[agent.route] = counts.get(agent.route, 0) + 1
        object.__setattr__(self, "pair_counts", counts)
        total_min = math.fsum(l.demand_min for l in self.lcs)
        object.__setattr__(self, "mean_service_target", total_min / len(self.fleet))

    @property
    def size(self) -> int:
        return len(self.fleet)

    def rcs_by_id(self, rcs_id: str) -> Rcs:
        return next(r for r in self.rcs if r.id == rcs_id)

    def lcs_by_id(self, lcs_id: str) -> Lcs:
        return next(l for l in self.lcs if l.id == lcs_id)

    def powers(self, agent: MesAgent) -> tuple[float, float]:
        """(P_i, P_j) along the agent's route."""
        return self.rcs_by_id(agent.rcs).charge_power, self.lcs_by_id(agent.lcs).discharge_power

    @cached_property
    def arrays(self) -> FleetArrays:
        rcs_pos = {r.id: n for n, r in enumerate(self.rcs)}
        lcs_pos = {l.id: n for n, l in enumerate(self.lcs)}
        rcs_index = np.array([rcs_pos[a.rcs] for a in self.fleet], dtype=int)
        lcs_index = np.array([lcs_pos[a.lcs] for a in self.fleet], dtype=int)

        def col(name):
            return np.array([getattr(a, name) for a in self.fleet], dtype=float)

        return FleetArrays(
            rcs_index=rcs_index,
            lcs_index=lcs_index,
            rcs_power=np.array([r.charge_power for r in self.rcs])[rcs_index],
            lcs_power=np.array([l.discharge_power for l in self.lcs])[lcs_index],
            battery=col("battery_capacity"),
            capacity=col("battery_capacity") - col("initial_soc"),
            time_weight=col("time_weight"),
            degradation_weight=col("degradation_weight"),
            dod_quadratic=col("dod_quadratic"),
            dod_linear=col("dod_linear"),
            power_degradation=col("power_degradation"),
        )

    def with_loading_weight(self, value: float) -> "Scenario":
        return replace(self, loading_weight=value)

    def with_degradation_weight(self, value: float) -> "Scenario":
        return replace(self, fleet=tuple(replace(a, degradation_weight=value) for a in self.fleet))


# ---------------------------------------------------------------------------
# fleet generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FleetSpec:
    """Distribution parameters for a randomly drawn fleet.

    ``pair_counts`` lists ``(rcs_id, lcs_id, count)`` triples. Each route pair
    draws from its own seeded stream, so scaling the counts keeps the first
    agents of every pair unchanged.
    """

    pair_counts: tuple[tuple[str, str, int], ...]
    capacity_mean: float = 14.0
    capacity_std: float = 5.0
    battery_mean: float = 80.0
    battery_std: float = 10.0
    time_weight: float = 30.0
    degradation_weight: float = 1e5
    dod_quadratic: float = 1.0
    dod_linear: float = -0.222
    power_degradation: float | None = 5.08e-4
    degradation_curve: DegradationCurve | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "pair_counts", tuple((str(i), str(j), int(n)) for i, j, n in self.pair_counts)
        )
        for name in ("capacity_mean", "capacity_std", "battery_mean", "battery_std"):
            _require(getattr(self, name) >= 0, f"fleet_spec.{name}", "nonnegative")
        _require(self.battery_mean > 0, "fleet_spec.battery_mean", "positive battery mean")
        for i, j, n in self.pair_counts:
            _require(n >= 0, f"fleet_spec.pair_counts[{i},{j}]", "count >= 0")
        _require(
            (self.power_degradation is None) != (self.degradation_curve is None),
            "fleet_spec.power_degradation",
            "exactly one of power_degradation / degradation_curve",
        )

    def scaled(self, multiplier: int) -> "FleetSpec":
        return replace(self, pair_counts=tuple((i, j, n * multiplier) for i, j, n in self.pair_counts))


_MAX_REDRAWS = 10_000


def _truncated_normal(rng: np.random.Generator, mean: float, std: float, low: float,
                      high: float, low_open: bool = False) -> float:
    if std == 0:
        return float(min(max(mean, low), high))
    for _ in range(_MAX_REDRAWS):
        x = float(rng.normal(mean, std))
        if (x > low if low_open else x >= low) and x <= high:
            return x
    raise ScenarioError("truncated normal rejects every draw", "fleet_spec")


def generate_fleet(spec: FleetSpec, seed: int, lcs: Sequence[Lcs] = ()) -> list[MesAgent]:
    """Draw a fleet: battery B ~ N(mean, std) > 0, capacity ~ N(mean, std) in [0, B]."""
    powers = {l.id: l.discharge_power for l in lcs}
    fleet = []
    for pair, (i, j, count) in enumerate(spec.pair_counts):
        rng = np.random.default_rng([seed, pair])
        if spec.degradation_curve is not None:
            if j not in powers:
                raise ScenarioError(f"unknown LCS {j!r} for degradation curve", "fleet_spec")
            dk = power_degradation_factor(spec.degradation_curve, powers[j])
        else:
            dk = spec.power_degradation
        for n in range(count):
            battery = _truncated_normal(rng, spec.battery_mean, spec.battery_std, 0.0, math.inf,
                                        low_open=True)
            cap = _truncated_normal(rng, spec.capacity_mean, spec.capacity_std, 0.0, battery)
            fleet.append(MesAgent(
                id=f"{i}-{j}-{n + 1}",
                rcs=i,
                lcs=j,
                battery_capacity=battery,
                initial_soc=battery - cap,
                time_weight=spec.time_weight,
                degradation_weight=spec.degradation_weight,
                dod_quadratic=spec.dod_quadratic,
                dod_linear=spec.dod_linear,
                power_degradation=dk,
            ))
    return fleet


# ---------------------------------------------------------------------------
# documents
# ---------------------------------------------------------------------------


def _num(table: Mapping, key: str, where: str, default=None) -> float:
    if key not in table:
        if default is not None:
            return default
        raise ScenarioError("missing numeric field", f"{where}.{key}")
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"expected a number, got {value!r}", f"{where}.{key}")
    return float(value)


def _curve(raw, where: str) -> DegradationCurve:
    if not isinstance(raw, list) or len(raw) != 4:
        raise ScenarioError("expected four coefficients [b1, b2, b3, b4]", where)
    return DegradationCurve(*(float(x) for x in raw))


def _fleet_spec_from(doc: Mapping) -> FleetSpec:
    pairs = []
    for n, entry in enumerate(doc.get("pair_counts", [])):
        try:
            pairs.append((entry["rcs"], entry["lcs"], int(entry["count"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError("expected {rcs, lcs, count}", f"fleet_spec.pair_counts[{n}]") from exc
    if not pairs:
        raise ScenarioError("missing pair counts", "fleet_spec.pair_counts")
    curve = None
    dk = None
    if "degradation_curve" in doc:
        curve = _curve(doc["degradation_curve"], "fleet_spec.degradation_curve")
    else:
        dk = _num(doc, "power_degradation", "fleet_spec", 5.08e-4)
    w = "fleet_spec"
    return FleetSpec(
        pair_counts=tuple(pairs),
        capacity_mean=_num(doc, "capacity_mean", w, 14.0),
        capacity_std=_num(doc, "capacity_std", w, 5.0),
        battery_mean=_num(doc, "battery_mean", w, 80.0),
        battery_std=_num(doc, "battery_std", w, 10.0),
        time_weight=_num(doc, "time_weight", w, 30.0),
        degradation_weight=_num(doc, "degradation_weight", w, 1e5),
        dod_quadratic=_num(doc, "dod_quadratic", w, 1.0),
        dod_linear=_num(doc, "dod_linear", w, -0.222),
        power_degradation=dk,
        degradation_curve=curve,
    )


def scenario_from_dict(doc: Mapping, seed: int | None = None) -> Scenario:
    """Build a scenario from a parsed document.

    ``seed`` overrides ``fleet_spec.seed`` when the fleet is generated.
    """
    try:
        rcs = [Rcs(str(r["id"]), _num(r, "surplus_energy", f"rcs[{r['id']}]"),
                   _num(r, "charge_power", f"rcs[{r['id']}]")) for r in doc.get("rcs", [])]
        lcs = [Lcs(str(l["id"]), _num(l, "demand_min", f"lcs[{l['id']}]"),
                   _num(l, "demand_max", f"lcs[{l['id']}]"),
                   _num(l, "discharge_power", f"lcs[{l['id']}]")) for l in doc.get("lcs", [])]
    except KeyError as exc:
        raise ScenarioError("station entry without an id", "rcs/lcs") from exc
    weights = doc.get("weights", {})
    alpha_l = _num(weights, "loading", "weights", 0.5)

    if "fleet" in doc and "fleet_spec" in doc:
        raise ScenarioError("give either [[fleet]] or [fleet_spec], not both", "fleet")
    if "fleet_spec" in doc:
        spec = _fleet_spec_from(doc["fleet_spec"])
        if seed is None:
            seed = int(doc["fleet_spec"].get("seed", 0))
        fleet = generate_fleet(spec, seed, lcs)
    else:
        powers = {l.id: l.discharge_power for l in lcs}
        fleet = []
        for n, a in enumerate(doc.get("fleet", [])):
            where = f"fleet[{a.get('id', n)}]"
            for key in ("id", "rcs", "lcs"):
                if key not in a:
                    raise ScenarioError("missing field", f"{where}.{key}")
            if "degradation_curve" in a:
                if a["lcs"] not in powers:
                    raise ScenarioError("references an unknown LCS", f"{where}.lcs")
                dk = power_degradation_factor(_curve(a["degradation_curve"], where),
                                              powers[a["lcs"]])
            else:
                dk = _num(a, "power_degradation", where)
            fleet.append(MesAgent(
                id=str(a["id"]),
                rcs=str(a["rcs"]),
                lcs=str(a["lcs"]),
                battery_capacity=_num(a, "battery_capacity", where),
                initial_soc=_num(a, "initial_soc", where),
                time_weight=_num(a, "time_weight", where),
                degradation_weight=_num(a, "degradation_weight", where),
                dod_quadratic=_num(a, "dod_quadratic", where),
                dod_linear=_num(a, "dod_linear", where),
                power_degradation=dk,
            ))
    return Scenario(rcs=tuple(rcs), lcs=tuple(lcs), fleet=tuple(fleet), loading_weight=alpha_l)


def loads_document(text: str) -> dict:
    try:
        return tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ScenarioError(f"parse error: {exc}") from exc


def load_scenario(source: str | Path | Mapping, seed: int | None = None) -> Scenario:
    """Load a scenario from a TOML path, a TOML string, or an already parsed mapping."""
    if isinstance(source, Mapping):
        return scenario_from_dict(source, seed)
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and source.endswith(".toml")):
        path = Path(source)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ScenarioError(f"cannot read {path}: {exc.strerror}") from exc
        return scenario_from_dict(loads_document(text), seed)
    return scenario_from_dict(loads_document(source), seed)


def _fmt(x: float) -> str:
    # repr is the shortest string that round-trips the double exactly
    r = repr(float(x))
    if r in ("inf", "-inf", "nan"):
        raise ScenarioError(f"cannot serialize {r}")
    return r


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def dump_scenario(scenario: Scenario) -> str:
    """Serialize with an explicit ``[[fleet]]``; ``load_scenario`` restores an equal object."""
    out = ["[weights]", f"loading = {_fmt(scenario.loading_weight)}", ""]
    for r in scenario.rcs:
        out += ["[[rcs]]", f"id = {_quote(r.id)}", f"surplus_energy = {_fmt(r.surplus_energy)}",
                f"charge_power = {_fmt(r.charge_power)}", ""]
    for l in scenario.lcs:
        out += ["[[lcs]]", f"id = {_quote(l.id)}", f"demand_min = {_fmt(l.demand_min)}",
                f"demand_max = {_fmt(l.demand_max)}",
                f"discharge_power = {_fmt(l.discharge_power)}", ""]
    for a in scenario.fleet:
        out += [
            "[[fleet]]",
            f"id = {_quote(a.id)}",
            f"rcs = {_quote(a.rcs)}",
            f"lcs = {_quote(a.lcs)}",
            f"battery_capacity = {_fmt(a.battery_capacity)}",
            f"initial_soc = {_fmt(a.initial_soc)}",
            f"time_weight = {_fmt(a.time_weight)}",
            f"degradation_weight = {_fmt(a.degradation_weight)}",
            f"dod_quadratic = {_fmt(a.dod_quadratic)}",
            f"dod_linear = {_fmt(a.dod_linear)}",
            f"power_degradation = {_fmt(a.power_degradation)}",
            "",
        ]
    return "\n".join(out)


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(dump_scenario(scenario), encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# reference setting
# ---------------------------------------------------------------------------

REFERENCE_PAIRS = (("R1", "L1", 6), ("R1", "L2", 8), ("R2", "L1", 7), ("R2", "L2", 4))


def reference_document() -> dict:
    """Parsed scenario document for the two-RCS, two-LCS, 25-MES reference setting."""
    text = (Path(__file__).parent / "data" / "reference.toml").read_text(encoding="utf-8")
    return loads_document(text)


def reference_scenario(seed: int = 0, **fleet_overrides) -> Scenario:
    doc = reference_document()
    doc["fleet_spec"].update(fleet_overrides)
    return scenario_from_dict(doc, seed)
