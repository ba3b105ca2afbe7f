"""Command-line front end for reproducible migration experiments.

Subcommands: ``paths`` (catalog dump), ``schedule`` (one policy run),
``simulate`` (capacity savings averaged over repetitions), ``bench``
(greedy vs exact run times), ``ilp-export`` (LP text model). Every
command is deterministic for a fixed seed; CSV/JSON outputs are
byte-identical across runs, and report commands also render a PNG
figure next to the data.

Flag defaults may come from a JSON config file (``--config``); explicit
flags win. The output directory falls back to $SDNMIG_OUT, then ./out.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
import time
from pathlib import Path

from . import exact, pathcat, plots, scheduler, tesim, topology

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_INFEASIBLE = 4
EXIT_SEARCH = 5

DEFAULTS = {
    "fixture": None,
    "file": None,
    "seed": 1,
    "T": 3,
    "mode": "count",
    "m": None,
    "policy": "greedy",
    "unit_cost": 1.0,
    "reps": 10,
    "out": None,
    "cap": 1000,
    "priorities": None,
    "headroom": 0.7,
    "granularities": [1, 5, 10, 40, 100, 400, 1000],
    "growth_low": 1.05,
    "growth_high": 1.3,
    "sweeps": 100,
    "node_limit": 2_000_000,
    "sizes": [20, 40, 60, 80],
    "bench_T": 5,
    "figures": True,
}


class ConfigError(ValueError):
    pass


class ExperimentConfig:
    """Merged view of CLI flags, the optional JSON config, and defaults."""

    def __init__(self, args: argparse.Namespace):
        file_values = {}
        if getattr(args, "config", None):
            config_path = Path(args.config)
            if not config_path.is_file():
                raise ConfigError(f"config file not found: {config_path}")
            try:
                file_values = json.loads(config_path.read_text())
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}") from exc
            unknown = set(file_values) - set(DEFAULTS)
            if unknown:
                raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged = dict(DEFAULTS)
        merged.update(file_values)
        for key in DEFAULTS:
            flag = getattr(args, key, None)
            if flag is not None:
                merged[key] = flag
        if merged["out"] is None:
            merged["out"] = os.environ.get("SDNMIG_OUT", "out")
        self._values = merged
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")
        if self.fixture and self.file:
            raise ConfigError("give either --fixture or --file, not both")

    def __getattr__(self, key: str):
        try:
            return self._values[key]
        except KeyError:
            raise AttributeError(key) from None

    def sim_config(self) -> tesim.SimConfig:
        return tesim.SimConfig(
            headroom=self.headroom,
            granularities=tuple(self.granularities),
            growth_low=self.growth_low,
            growth_high=self.growth_high,
            sweeps=self.sweeps,
        )

    def out_dir(self) -> Path:
        out = Path(self.out)
        out.mkdir(parents=True, exist_ok=True)
        return out

    def load_topology(self) -> topology.Topology:
        if self.file:
            path = Path(self.file)
            if not path.is_file():
                raise ConfigError(f"topology file not found: {path}")
            return topology.parse_sndlib(path.read_text())
        name = self.fixture or "fig2"
        return topology.fixture(name).base

    def load_weighted(self, seed: int | None = None) -> topology.WeightedTopology:
        """Fixture weights are canonical; file topologies get seeded weights."""
        if self.file:
            topo = self.load_topology()
            return topology.generate_ospf_weights(
                topo, self.seed if seed is None else seed
            )
        return topology.fixture(self.fixture or "fig2")

    def constraints(self, topo: topology.Topology) -> scheduler.ScheduleConstraints:
        if self.mode == "count":
            return scheduler.ScheduleConstraints.count(self.T, self.m)
        costs = topology.migration_costs(topo, self.unit_cost)
        return scheduler.ScheduleConstraints.budget(self.T, costs)

    def priority_map(self) -> scheduler.PriorityMap | None:
        if not self.priorities:
            return None
        path = Path(self.priorities)
        if not path.is_file():
            raise ConfigError(f"priorities file not found: {path}")
        raw = json.loads(path.read_text())
        priorities = {int(pid): float(phi) for pid, phi in raw.items()}
        if any(phi <= 0 for phi in priorities.values()):
            raise ConfigError("priorities must be strictly positive")
        return priorities


def _derived_seed(master: int, *salt) -> int:
    label = ":".join(str(s) for s in (master, *salt))
    return random.Random(label).randrange(2**63)


def _write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _write_json(path: Path, payload) -> None:
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _build_schedule(
    cfg: ExperimentConfig,
    catalog: pathcat.PathCatalog,
    constraints: scheduler.ScheduleConstraints,
    policy: str,
    seed: int | None = None,
):
    """Returns (schedule, OptimalResult | None)."""
    if policy == "greedy":
        return scheduler.greedy_schedule(catalog, constraints), None
    if policy == "random":
        return (
            scheduler.random_schedule(
                set(catalog.nodes), constraints, cfg.seed if seed is None else seed
            ),
            None,
        )
    if policy == "optimal":
        result = exact.optimal_schedule(
            catalog, constraints, cfg.priority_map(), node_limit=cfg.node_limit
        )
        return result.schedule, result
    raise ConfigError(f"unknown policy {policy!r}")


def cmd_paths(cfg: ExperimentConfig) -> int:
    wtopo = cfg.load_weighted()
    catalog = pathcat.build_catalog(wtopo, cap=cfg.cap)
    out = cfg.out_dir()
    _write_json(out / "catalog.json", pathcat.catalog_to_json(catalog))
    topo = wtopo.base
    print(
        f"parsed {len(topo.nodes)} nodes, {len(topo.links)} links; "
        f"{len(catalog.pair_paths)} pairs, {len(catalog.alt_ids)} alternative "
        f"paths, {len(catalog.truncated_pairs)} truncated pairs"
    )
    print(f"wrote {out / 'catalog.json'}")
    return EXIT_OK


def cmd_schedule(cfg: ExperimentConfig) -> int:
    wtopo = cfg.load_weighted()
    catalog = pathcat.build_catalog(wtopo, cap=cfg.cap)
    constraints = cfg.constraints(wtopo.base)
    schedule, result = _build_schedule(cfg, catalog, constraints, cfg.policy)
    priorities = cfg.priority_map()

    report = scheduler.schedule_report(catalog, schedule, constraints, priorities)
    if result is not None:
        report["objective"] = result.objective
        report["proved"] = result.proved
        report["explored"] = result.explored
    out = cfg.out_dir()
    _write_json(out / "schedule.json", report)

    header = ["step", "cumulative_available", "objective_to_date", "spent", "residual"]
    rows = []
    for row in report["per_step"]:
        rows.append(
            [
                row["step"],
                row["cumulative_available"],
                row["objective_to_date"],
                row.get("spent", ""),
                row.get("residual", ""),
            ]
        )
    _write_text(out / "availability.csv", _csv_text(header, rows))
    if cfg.figures:
        plots.availability_figure(
            {cfg.policy: report["availability_curve"]}, str(out / "availability.png")
        )
    print(
        f"{cfg.policy} schedule over T={schedule.T} ({cfg.mode} mode): "
        f"objective {report['objective']}, availability {report['availability_curve']}"
    )
    if result is not None and not result.proved:
        print(
            f"warning: search effort exhausted after {result.explored} states; "
            "result is best-found, not proved optimal"
        )
        return EXIT_SEARCH
    return EXIT_OK


def cmd_simulate(cfg: ExperimentConfig) -> int:
    sim = cfg.sim_config()
    out = cfg.out_dir()
    header = [
        "step",
        "available_paths",
        "ospf_gbps",
        "te_gbps",
        "savings_gbps",
        "savings_pct",
    ]
    per_rep_rows: list[list[dict]] = []
    unproved = 0
    for rep in range(cfg.reps):
        wtopo = cfg.load_weighted(seed=_derived_seed(cfg.seed, rep, "weights"))
        catalog = pathcat.build_catalog(wtopo, cap=cfg.cap)
        constraints = cfg.constraints(wtopo.base)
        schedule, result = _build_schedule(
            cfg, catalog, constraints, cfg.policy,
            seed=_derived_seed(cfg.seed, rep, "schedule"),
        )
        if result is not None and not result.proved:
            unproved += 1
        report = tesim.savings_series(
            wtopo,
            catalog,
            schedule,
            sim,
            seed=_derived_seed(cfg.seed, rep, "traffic"),
        )
        rows = tesim.report_rows(report)
        per_rep_rows.append(rows)
        _write_text(
            out / f"savings_rep{rep:03d}.csv",
            _csv_text(header, [[r[k] for k in header] for r in rows]),
        )

    mean_rows = []
    for t in range(cfg.T):
        mean_rows.append(
            [
                t + 1,
                *(
                    sum(rep[t][key] for rep in per_rep_rows) / cfg.reps
                    for key in header[1:]
                ),
            ]
        )
    _write_text(out / "savings_mean.csv", _csv_text(header, mean_rows))
    manifest = {
        "policy": cfg.policy,
        "mode": cfg.mode,
        "seed": cfg.seed,
        "T": cfg.T,
        "reps": cfg.reps,
        "rep_files": [f"savings_rep{r:03d}.csv" for r in range(cfg.reps)],
        "mean_file": "savings_mean.csv",
    }
    _write_json(out / "simulate.json", manifest)
    if cfg.figures:
        plots.savings_figure(
            {cfg.policy: [row[4] for row in mean_rows]}, str(out / "savings.png")
        )
    print(
        f"simulated {cfg.reps} repetitions of {cfg.policy}/{cfg.mode}; "
        f"mean savings per step: {[round(row[4], 3) for row in mean_rows]}"
    )
    if unproved:
        print(f"warning: {unproved} repetitions hit the exact-search effort limit")
        return EXIT_SEARCH
    return EXIT_OK


def cmd_bench(cfg: ExperimentConfig) -> int:
    sizes = list(cfg.sizes)
    T = cfg.bench_T
    out = cfg.out_dir()
    header = ["policy", "n_nodes", "milliseconds", "explored", "search_space", "note"]
    rows: list[list] = []
    points: dict[str, list[tuple[int, float]]] = {"greedy": [], "optimal": []}

    prepared = []
    for n in sizes:
        n_links = min(n * (n - 1) // 2, max(n - 1, round(1.6 * n)))
        topo = topology.random_connected_topology(
            n, n_links, seed=_derived_seed(cfg.seed, n, "bench")
        )
        wtopo = topology.generate_ospf_weights(topo, _derived_seed(cfg.seed, n, "w"))
        catalog = pathcat.build_catalog(wtopo, cap=cfg.cap)
        if cfg.mode == "count":
            constraints = scheduler.ScheduleConstraints.count(T)
        else:
            constraints = scheduler.ScheduleConstraints.budget(
                T, topology.migration_costs(topo, cfg.unit_cost)
            )
        scheduler.greedy_schedule(catalog, constraints)  # warm-up
        prepared.append((n, catalog, constraints))

    # interleave timing rounds so a transient load spike hits every size
    # equally instead of skewing one point of the growth curve
    greedy_ms = {n: [] for n in sizes}
    for _ in range(9):
        for n, catalog, constraints in prepared:
            greedy_ms[n].append(
                _time_ms(scheduler.greedy_schedule, catalog, constraints)
            )

    exact_rows = {}
    for n, catalog, constraints in prepared:
        space = exact.search_space_size(n, T)
        if space > cfg.node_limit:
            exact_rows[n] = [
                "optimal", n, "", "", space,
                f"skipped: search space > {cfg.node_limit}",
            ]
            continue
        start = time.perf_counter()
        result = exact.optimal_schedule(
            catalog, constraints, node_limit=cfg.node_limit
        )
        ms = (time.perf_counter() - start) * 1000.0
        note = "" if result.proved else "effort limit reached"
        exact_rows[n] = ["optimal", n, ms, result.explored, space, note]
        points["optimal"].append((n, ms))

    for n in sizes:
        best_ms = min(greedy_ms[n])
        rows.append(["greedy", n, best_ms, "", "", ""])
        points["greedy"].append((n, best_ms))
        rows.append(exact_rows[n])

    _write_text(out / "runtimes.csv", _csv_text(header, rows))
    if cfg.figures:
        plots.runtime_figure(points, str(out / "runtime.png"))
    print(f"benchmarked sizes {sizes}; wrote {out / 'runtimes.csv'}")
    return EXIT_OK


def _time_ms(fn, *args) -> float:
    start = time.perf_counter()
    fn(*args)
    return (time.perf_counter() - start) * 1000.0


def cmd_ilp_export(cfg: ExperimentConfig) -> int:
    wtopo = cfg.load_weighted()
    catalog = pathcat.build_catalog(wtopo, cap=cfg.cap)
    constraints = cfg.constraints(wtopo.base)
    instance = exact.build_ilp(catalog, constraints, cfg.priority_map())
    out = cfg.out_dir()
    _write_text(out / "model.lp", exact.export_lp(instance))
    print(
        f"wrote {out / 'model.lp'}: {instance.variable_count} binary variables, "
        f"{instance.constraint_count} constraints"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdnmig",
        description="Plan and evaluate gradual IP-to-SDN network migration.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON file providing defaults for any flag")
        p.add_argument("--file", help="SNDlib native topology file")
        p.add_argument("--fixture", help="built-in topology (fig2)")
        p.add_argument("--seed", type=int)
        p.add_argument("--T", type=int, dest="T")
        p.add_argument("--mode", choices=["count", "budget"])
        p.add_argument("--m", type=int, help="nodes per step (count mode)")
        p.add_argument("--unit-cost", type=float, dest="unit_cost")
        p.add_argument("--cap", type=int, help="max enumerated paths per pair")
        p.add_argument("--priorities", help="JSON map of path id to priority")
        p.add_argument("--out", help="output directory (default $SDNMIG_OUT or ./out)")
        p.add_argument(
            "--no-figures",
            dest="figures",
            action="store_const",
            const=False,
            default=None,
        )
        p.add_argument("--node-limit", type=int, dest="node_limit")

    p_paths = sub.add_parser("paths", help="build and export the path catalog")
    common(p_paths)

    p_sched = sub.add_parser("schedule", help="compute one migration schedule")
    common(p_sched)
    p_sched.add_argument("--policy", choices=["greedy", "random", "optimal"])

    p_sim = sub.add_parser("simulate", help="capacity savings over repetitions")
    common(p_sim)
    p_sim.add_argument("--policy", choices=["greedy", "random", "optimal"])
    p_sim.add_argument("--reps", type=int)
    p_sim.add_argument("--headroom", type=float)
    p_sim.add_argument("--growth-low", type=float, dest="growth_low")
    p_sim.add_argument("--growth-high", type=float, dest="growth_high")
    p_sim.add_argument("--sweeps", type=int)
    p_sim.add_argument(
        "--granularities",
        type=lambda s: [float(x) for x in s.split(",")],
        help="comma-separated module sizes in Gbit/s",
    )

    p_bench = sub.add_parser("bench", help="time greedy vs exact scheduling")
    common(p_bench)
    p_bench.add_argument("--sizes", type=int, nargs="*")
    p_bench.add_argument("--bench-T", type=int, dest="bench_T")

    p_ilp = sub.add_parser("ilp-export", help="write the LP text model")
    common(p_ilp)

    return parser


_COMMANDS = {
    "paths": cmd_paths,
    "schedule": cmd_schedule,
    "simulate": cmd_simulate,
    "bench": cmd_bench,
    "ilp-export": cmd_ilp_export,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig(args)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except topology.SndlibParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except scheduler.InfeasibleScheduleError as exc:
        print(f"infeasible constraints: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
