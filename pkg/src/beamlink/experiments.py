"""Experiment orchestration: config loading, figure-analogue sweeps, CSV output.

Config files are JSON.  Field resolution order is: explicit value in the
file (or CLI override) > experiment-specific default > generic default, and
it happens entirely at load time, so a loaded config is fully resolved and
serializing it round-trips exactly.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from beamlink.linksim import LinkConfig, modulation_by_name, run_trials
from beamlink.channel import NakagamiParams
from beamlink.metrics import (
    Estimate,
    MetricPoint,
    MetricSeries,
    estimate_rates,
    mean_confidence,
    packet_error_rate,
    uncoded_stream_params,
)
from beamlink.topology import Node, build_scenario, detect_overlaps, lens_center_distance

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "ExperimentConfig",
    "EXPERIMENTS",
    "load_config",
    "serialize_config",
    "run_experiment",
    "emit_csv",
]


class ConfigError(ValueError):
    """Configuration parse or validation failure (CLI exit code 1)."""


EXPERIMENTS = (
    "capacity_vs_nodes",
    "per_vs_distance",
    "per_vs_modulation",
    "ber_vs_dimension",
    "custom",
)

NODE_COUNT_SWEEP = (2, 4, 8)
SPACING_SWEEP = (5.0, 8.0, 11.0)
MODULATION_SWEEP = ("bpsk", "qpsk")
DIMENSION_SWEEP = (2, 4)


@dataclass(frozen=True)
class ScenarioConfig:
    """Physical-layer and topology settings shared by every trial of a run."""

    dimension: int = 2
    modulation: str = "bpsk"
    packet_bits: int = 2304
    nakagami_m: float = 1.0
    nakagami_omega: float = 1.0
    rotation_angle: float = math.pi
    path_loss_exponent: float = 3.0
    reference_distance: float = 1.0
    node_count: int = 2
    node_spacing: float = 10.0
    range_radius: float = 6.0
    tx_power: float = 1.0
    per_formula: str = "conventional"
    transmission_mode: str = "multiplexing"
    include_interference: bool = True
    identity_channel: bool = False
    own_point_distance: float | None = None
    nodes: tuple[tuple[int, float, float, float, float], ...] | None = None
    measured_node: int | None = None
    measured_pair: tuple[int, int] | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved run: experiment, sweep, budget, seed, output."""

    experiment: str = "custom"
    snr_start: float = 0.0
    snr_stop: float = 10.0
    snr_step: float = 2.0
    trials: int = 200
    seed: int = 12345
    output: str = "results.csv"
    workers: int = 1
    scenario: ScenarioConfig = ScenarioConfig()

    def snr_points(self) -> tuple[float, ...]:
        count = int(math.floor((self.snr_stop - self.snr_start) / self.snr_step + 1e-9)) + 1
        return tuple(self.snr_start + k * self.snr_step for k in range(count))


# experiment-specific defaults, applied only where the config is silent
_EXPERIMENT_DEFAULTS: dict[str, dict] = {
    "capacity_vs_nodes": {
        "snr": {"start": 5.0, "stop": 5.0, "step": 1.0},
        "trials": 600,
    },
    # interference-limited operating point: the network normalization grows
    # like the inverse cross-link gain, so the transmit-referenced snr must be
    # large before thermal noise stops masking the interference floor.  The
    # receive point sits 4 m from its transmitter at every spacing, so the
    # interferer recedes 1 -> 4 -> 7 m across the sweep; worst-case fading
    # (m = 0.5) keeps the failure tail measurable.  Diversity mode avoids
    # inverting the driven effective channel, whose condition number is large
    # by construction.
    "per_vs_distance": {
        "snr": {"start": 120.0, "stop": 120.0, "step": 1.0},
        "trials": 1200,
        "scenario": {
            "transmission_mode": "diversity",
            "range_radius": 12.0,
            "own_point_distance": 4.0,
            "nakagami_m": 0.5,
            "packet_bits": 192,
        },
    },
    # single fading link: order constellations by their noise margin without
    # the coordinated-pair normalization dominating the comparison.
    "per_vs_modulation": {
        "snr": {"start": 0.0, "stop": 14.0, "step": 2.0},
        "trials": 400,
        "scenario": {"node_count": 1},
    },
    # single fading link so the diversity order of the antenna count is
    # visible at moderate snr; a coordinated pair would bury the 8-12 dB
    # window under the network normalization.
    "ber_vs_dimension": {
        "snr": {"start": 0.0, "stop": 14.0, "step": 2.0},
        "trials": 1500,
        "scenario": {
            "transmission_mode": "diversity",
            "include_interference": False,
            "node_count": 1,
            "nakagami_m": 1.0,
        },
    },
    "custom": {},
}

_TOP_KEYS = {"experiment", "snr", "trials", "seed", "output", "workers", "scenario"}
_SNR_KEYS = {"start", "stop", "step"}
_SCENARIO_KEYS = {f for f in ScenarioConfig.__dataclass_fields__}
_NODE_KEYS = {"id", "x", "y", "radius", "power"}


def _fail(msg: str) -> None:
    raise ConfigError(msg)


def _check_keys(mapping: dict, allowed: set, where: str) -> None:
    for key in mapping:
        if key not in allowed:
            _fail(f"unknown field {key!r} in {where}; expected one of {sorted(allowed)}")


def _as_number(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(f"field {field!r} must be a number, got {value!r}")
    return float(value)


def _as_int(value, field: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(f"field {field!r} must be an integer, got {value!r}")
    return value


def _parse_nodes(raw, field: str):
    if not isinstance(raw, list) or not raw:
        _fail(f"field {field!r} must be a non-empty list of node objects")
    out = []
    for entry in raw:
        if not isinstance(entry, dict):
            _fail(f"entries of {field!r} must be objects")
        _check_keys(entry, _NODE_KEYS, field)
        for required in ("id", "x", "y", "radius"):
            if required not in entry:
                _fail(f"node entry missing field {required!r}")
        out.append(
            (
                _as_int(entry["id"], "nodes.id"),
                _as_number(entry["x"], "nodes.x"),
                _as_number(entry["y"], "nodes.y"),
                _as_number(entry["radius"], "nodes.radius"),
                _as_number(entry.get("power", 1.0), "nodes.power"),
            )
        )
    ids = [n[0] for n in out]
    if len(set(ids)) != len(ids):
        _fail(f"duplicate node ids in {field!r}: {ids}")
    return tuple(out)


def _resolve(raw: dict, overrides: dict | None) -> ExperimentConfig:
    overrides = overrides or {}
    _check_keys(raw, _TOP_KEYS, "config")
    _check_keys(overrides, _TOP_KEYS, "overrides")

    experiment = overrides.get("experiment", raw.get("experiment", "custom"))
    if experiment not in EXPERIMENTS:
        _fail(f"unknown experiment {experiment!r}; expected one of {list(EXPERIMENTS)}")
    exp_defaults = _EXPERIMENT_DEFAULTS[experiment]

    def pick(field, generic):
        if field in overrides:
            return overrides[field]
        if field in raw:
            return raw[field]
        return exp_defaults.get(field, generic)

    snr_raw = overrides.get("snr", raw.get("snr", exp_defaults.get("snr")))
    if snr_raw is None:
        snr_raw = {"start": 0.0, "stop": 10.0, "step": 2.0}
    if not isinstance(snr_raw, dict):
        _fail(f"field 'snr' must be an object with {sorted(_SNR_KEYS)}")
    _check_keys(snr_raw, _SNR_KEYS, "snr")
    snr_start = _as_number(snr_raw.get("start", 0.0), "snr.start")
    snr_stop = _as_number(snr_raw.get("stop", snr_start), "snr.stop")
    snr_step = _as_number(snr_raw.get("step", 2.0), "snr.step")
    if snr_step <= 0:
        _fail(f"field 'snr.step' must be > 0, got {snr_step}")
    if snr_stop < snr_start:
        _fail(f"field 'snr.stop' must be >= snr.start, got {snr_stop} < {snr_start}")

    trials = _as_int(pick("trials", 200), "trials")
    if trials < 1:
        _fail(f"field 'trials' must be >= 1, got {trials}")
    seed = _as_int(pick("seed", 12345), "seed")
    workers = _as_int(pick("workers", 1), "workers")
    if workers < 1:
        _fail(f"field 'workers' must be >= 1, got {workers}")
    output = pick("output", "results.csv")
    if not isinstance(output, str) or not output:
        _fail(f"field 'output' must be a non-empty string, got {output!r}")

    sc_raw = raw.get("scenario", {})
    if not isinstance(sc_raw, dict):
        _fail("field 'scenario' must be an object")
    sc_over = overrides.get("scenario", {})
    if not isinstance(sc_over, dict):
        _fail("override 'scenario' must be an object")
    _check_keys(sc_raw, _SCENARIO_KEYS, "scenario")
    _check_keys(sc_over, _SCENARIO_KEYS, "scenario override")
    sc_exp = exp_defaults.get("scenario", {})
    merged = {**sc_exp, **sc_raw, **sc_over}
    scenario = _validate_scenario(merged)

    return ExperimentConfig(
        experiment=experiment,
        snr_start=snr_start,
        snr_stop=snr_stop,
        snr_step=snr_step,
        trials=trials,
        seed=seed,
        output=output,
        workers=workers,
        scenario=scenario,
    )


def _validate_scenario(merged: dict) -> ScenarioConfig:
    base = ScenarioConfig()
    vals = {}

    vals["dimension"] = _as_int(merged.get("dimension", base.dimension), "scenario.dimension")
    if vals["dimension"] < 1:
        _fail(f"field 'scenario.dimension' must be >= 1, got {vals['dimension']}")

    modulation = merged.get("modulation", base.modulation)
    try:
        modulation_by_name(modulation)
    except (ValueError, AttributeError):
        _fail(f"field 'scenario.modulation' must be bpsk or qpsk, got {modulation!r}")
    vals["modulation"] = modulation.lower()

    vals["packet_bits"] = _as_int(merged.get("packet_bits", base.packet_bits), "scenario.packet_bits")
    if vals["packet_bits"] < 1:
        _fail(f"field 'scenario.packet_bits' must be >= 1, got {vals['packet_bits']}")
    mode_early = merged.get("transmission_mode", base.transmission_mode)
    streams = 1 if mode_early == "diversity" else vals["dimension"]
    granule = modulation_by_name(vals["modulation"]).bits_per_symbol * streams
    if vals["packet_bits"] % granule != 0:
        _fail(
            f"field 'scenario.packet_bits' must be a multiple of {granule} "
            f"(bits per symbol x parallel streams), got {vals['packet_bits']}"
        )

    vals["nakagami_m"] = _as_number(merged.get("nakagami_m", base.nakagami_m), "scenario.nakagami_m")
    if vals["nakagami_m"] < 0.5:
        _fail(f"field 'scenario.nakagami_m' must be >= 0.5, got {vals['nakagami_m']}")
    vals["nakagami_omega"] = _as_number(
        merged.get("nakagami_omega", base.nakagami_omega), "scenario.nakagami_omega"
    )
    if vals["nakagami_omega"] <= 0:
        _fail(f"field 'scenario.nakagami_omega' must be > 0, got {vals['nakagami_omega']}")

    vals["rotation_angle"] = _as_number(
        merged.get("rotation_angle", base.rotation_angle), "scenario.rotation_angle"
    )
    vals["path_loss_exponent"] = _as_number(
        merged.get("path_loss_exponent", base.path_loss_exponent), "scenario.path_loss_exponent"
    )
    if vals["path_loss_exponent"] < 0:
        _fail("field 'scenario.path_loss_exponent' must be >= 0")
    vals["reference_distance"] = _as_number(
        merged.get("reference_distance", base.reference_distance), "scenario.reference_distance"
    )
    if vals["reference_distance"] <= 0:
        _fail("field 'scenario.reference_distance' must be > 0")

    vals["node_count"] = _as_int(merged.get("node_count", base.node_count), "scenario.node_count")
    if vals["node_count"] < 1:
        _fail(f"field 'scenario.node_count' must be >= 1, got {vals['node_count']}")
    vals["node_spacing"] = _as_number(
        merged.get("node_spacing", base.node_spacing), "scenario.node_spacing"
    )
    if vals["node_spacing"] <= 0:
        _fail("field 'scenario.node_spacing' must be > 0")
    vals["range_radius"] = _as_number(
        merged.get("range_radius", base.range_radius), "scenario.range_radius"
    )
    if vals["range_radius"] <= 0:
        _fail("field 'scenario.range_radius' must be > 0")
    vals["tx_power"] = _as_number(merged.get("tx_power", base.tx_power), "scenario.tx_power")
    if vals["tx_power"] <= 0:
        _fail("field 'scenario.tx_power' must be > 0")

    per_formula = merged.get("per_formula", base.per_formula)
    if per_formula not in ("literal", "conventional"):
        _fail(f"field 'scenario.per_formula' must be literal or conventional, got {per_formula!r}")
    vals["per_formula"] = per_formula

    mode = merged.get("transmission_mode", base.transmission_mode)
    if mode not in ("multiplexing", "diversity"):
        _fail(
            "field 'scenario.transmission_mode' must be multiplexing or diversity, "
            f"got {mode!r}"
        )
    vals["transmission_mode"] = mode

    for flag in ("include_interference", "identity_channel"):
        v = merged.get(flag, getattr(base, flag))
        if not isinstance(v, bool):
            _fail(f"field 'scenario.{flag}' must be true or false, got {v!r}")
        vals[flag] = v

    own = merged.get("own_point_distance", base.own_point_distance)
    if own is not None:
        own = _as_number(own, "scenario.own_point_distance")
        if own <= 0:
            _fail("field 'scenario.own_point_distance' must be > 0")
    vals["own_point_distance"] = own

    nodes = merged.get("nodes", base.nodes)
    if nodes is not None and not isinstance(nodes, tuple):
        nodes = _parse_nodes(nodes, "scenario.nodes")
    vals["nodes"] = nodes

    known_ids = (
        [n[0] for n in nodes] if nodes is not None else list(range(vals["node_count"]))
    )
    measured_node = merged.get("measured_node", base.measured_node)
    if measured_node is not None:
        measured_node = _as_int(measured_node, "scenario.measured_node")
        if measured_node not in known_ids:
            _fail(f"field 'scenario.measured_node' references unknown node {measured_node}")
    vals["measured_node"] = measured_node

    measured_pair = merged.get("measured_pair", base.measured_pair)
    if measured_pair is not None:
        if not isinstance(measured_pair, (list, tuple)) or len(measured_pair) != 2:
            _fail("field 'scenario.measured_pair' must be a pair of node ids")
        measured_pair = (
            _as_int(measured_pair[0], "scenario.measured_pair"),
            _as_int(measured_pair[1], "scenario.measured_pair"),
        )
        for nid in measured_pair:
            if nid not in known_ids:
                _fail(f"field 'scenario.measured_pair' references unknown node {nid}")
        measured_pair = (min(measured_pair), max(measured_pair))
    vals["measured_pair"] = measured_pair

    return ScenarioConfig(**vals)


def load_config(path: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Load and fully validate a JSON config; overrides win over file fields.

    With path=None an all-defaults config (plus overrides) is produced.
    """
    raw: dict = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            _fail(f"config file not found: {path}")
        except json.JSONDecodeError as e:
            _fail(f"config parse error at line {e.lineno}, column {e.colno}: {e.msg}")
        if not isinstance(raw, dict):
            _fail("config root must be a JSON object")
    return _resolve(raw, overrides)


def serialize_config(config: ExperimentConfig) -> str:
    """JSON text that reloads to an equal config (all fields explicit)."""
    sc = asdict(config.scenario)
    if sc["nodes"] is not None:
        sc["nodes"] = [
            {"id": n[0], "x": n[1], "y": n[2], "radius": n[3], "power": n[4]}
            for n in config.scenario.nodes
        ]
    if sc["measured_pair"] is not None:
        sc["measured_pair"] = list(sc["measured_pair"])
    payload = {
        "experiment": config.experiment,
        "snr": {"start": config.snr_start, "stop": config.snr_stop, "step": config.snr_step},
        "trials": config.trials,
        "seed": config.seed,
        "output": config.output,
        "workers": config.workers,
        "scenario": sc,
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def _scenario_hash(sc: ScenarioConfig) -> str:
    blob = json.dumps(asdict(sc), sort_keys=True, default=list)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _build_nodes(sc: ScenarioConfig) -> list[Node]:
    if sc.nodes is not None:
        return [
            Node(id=nid, position=np.array([x, y]), range_radius=radius, tx_power=power)
            for nid, x, y, radius, power in sc.nodes
        ]
    return [
        Node(
            id=i,
            position=np.array([i * sc.node_spacing, 0.0]),
            range_radius=sc.range_radius,
            tx_power=sc.tx_power,
        )
        for i in range(sc.node_count)
    ]


def _build_network(sc: ScenarioConfig):
    nodes = _build_nodes(sc)
    offsets = None
    if sc.own_point_distance is not None and len(nodes) > 1:
        by_id = {n.id: n for n in nodes}
        offsets = {}
        for i, j in detect_overlaps(nodes):
            a, c = by_id[i], by_id[j]
            d = float(np.linalg.norm(c.position - a.position))
            x = lens_center_distance(a, c)
            # park each pair point at the configured distance from its own node
            offsets[(i, j)] = (sc.own_point_distance - x, (d - sc.own_point_distance) - x)
    return build_scenario(
        nodes,
        path_loss_exponent=sc.path_loss_exponent,
        reference_distance=sc.reference_distance,
        point_offsets=offsets,
    )


def _build_link(sc: ScenarioConfig, snr_points: tuple[float, ...]) -> LinkConfig:
    return LinkConfig(
        snr_db=snr_points,
        dimension=sc.dimension,
        modulation=modulation_by_name(sc.modulation),
        packet_bits=sc.packet_bits,
        fading=None if sc.identity_channel else NakagamiParams(sc.nakagami_m, sc.nakagami_omega),
        rotation_angle=sc.rotation_angle,
        mode=sc.transmission_mode,
        include_interference=sc.include_interference,
        measured_pair=sc.measured_pair,
        measured_node=sc.measured_node,
    )


def _sweep(config: ExperimentConfig) -> list[tuple[str, float, ScenarioConfig]]:
    sc = config.scenario
    if config.experiment == "capacity_vs_nodes":
        return [("node_count", float(n), replace(sc, node_count=n)) for n in NODE_COUNT_SWEEP]
    if config.experiment == "per_vs_distance":
        return [("node_spacing", s, replace(sc, node_spacing=s)) for s in SPACING_SWEEP]
    if config.experiment == "per_vs_modulation":
        return [
            ("modulation", float(modulation_by_name(m).bits_per_symbol), replace(sc, modulation=m))
            for m in MODULATION_SWEEP
        ]
    if config.experiment == "ber_vs_dimension":
        return [("dimension", float(d), replace(sc, dimension=d)) for d in DIMENSION_SWEEP]
    return [("custom", 0.0, sc)]


def run_experiment(config: ExperimentConfig) -> list[MetricSeries]:
    """Run the configured experiment's sweep; one MetricSeries per value."""
    out = []
    for param_name, param_value, sc in _sweep(config):
        scenario = _build_network(sc)
        link = _build_link(sc, config.snr_points())
        point_results = run_trials(
            scenario, link, config.trials, config.seed, workers=config.workers
        )
        points = []
        for pr in point_results:
            rates = estimate_rates(pr.stats)
            streams = uncoded_stream_params(
                symbol_error_rate=rates["ser"].value,
                packet_bits=sc.packet_bits,
                bits_per_symbol=link.modulation.bits_per_symbol,
                streams=link.streams,
                min_distance=link.modulation.min_distance,
            )
            model = packet_error_rate(streams, sc.per_formula)
            # bracket the analytic value by evaluating at the SER interval ends
            ends = [
                packet_error_rate(
                    uncoded_stream_params(
                        symbol_error_rate=s,
                        packet_bits=sc.packet_bits,
                        bits_per_symbol=link.modulation.bits_per_symbol,
                        streams=link.streams,
                        min_distance=link.modulation.min_distance,
                    ),
                    sc.per_formula,
                )
                for s in (rates["ser"].ci_low, rates["ser"].ci_high)
            ]
            per_model = Estimate(value=model, ci_low=min(*ends, model), ci_high=max(*ends, model))
            points.append(
                MetricPoint(
                    snr_db=pr.snr_db,
                    capacity=mean_confidence(pr.capacity_samples),
                    ber=rates["ber"],
                    ser=rates["ser"],
                    per=rates["per"],
                    per_model=per_model,
                )
            )
        series = MetricSeries(
            param_name=param_name,
            param_value=param_value,
            points=points,
            seed=config.seed,
            trials=config.trials,
            scenario_hash=_scenario_hash(sc),
        )
        out.append(series)
    return out


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def emit_csv(series: list[MetricSeries], path: str) -> None:
    """Write the deterministic CSV: built fully in memory, single write."""
    if not series:
        raise ValueError("no series to emit")
    rows = []
    for s in series:
        for p in s.points:
            metrics = {
                "ber": p.ber,
                "capacity": p.capacity,
                "per": p.per,
                "per_model": p.per_model,
                "ser": p.ser,
            }
            for name, est in metrics.items():
                rows.append(
                    (
                        p.snr_db,
                        s.param_name,
                        s.param_value,
                        name,
                        est.value,
                        est.ci_low,
                        est.ci_high,
                        s.trials,
                        s.seed,
                    )
                )
    rows.sort(key=lambda r: (r[0], r[2], r[3]))
    lines = ["snr_db,param_name,param_value,metric,value,ci_low,ci_high,trials,seed"]
    for snr, pname, pval, metric, value, lo, hi, trials, seed in rows:
        lines.append(
            f"{_fmt(snr)},{pname},{_fmt(pval)},{metric},{_fmt(value)},{_fmt(lo)},{_fmt(hi)},"
            f"{trials},{seed}"
        )
    text = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
