"""Parameter sweeps, figure recipes and CSV emission."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .chain import ConvergenceError, DegenerateChainError, bianchi_tau, solve_fixed_point
from .config import RunConfig, with_values
from .simulator import SimConfig, replicate, run
from .throughput import saturation_throughput

AXIS_KEY = {"sinr_db": "sinr_db", "stations": "n", "capture_db": "capture_db",
            "payload_bytes": "payload_bytes"}


class PointError(RuntimeError):
    """A grid point failed to solve or simulate."""


def grid(start: float, stop: float, step: float, integer: bool = False) -> list:
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    values = [round(start + i * step, 12) for i in range(count)]
    if integer:
        values = [int(round(v)) for v in values]
    return values


def simulate_point(config: RunConfig) -> dict:
    sim = SimConfig(n=config.n, mac=config.mac, channel=config.channel, slots=config.slots,
                    seed=config.seed, capture_mode=config.capture_mode)
    if config.replications >= 2:
        rep = replicate(sim, config.replications)
        return {"tau_sim": rep.tau_mean, "tau_sim_se": rep.tau_se,
                "s_sim": rep.s_mean, "s_sim_se": rep.s_se}
    stats = run(sim)
    return {"tau_sim": stats.empirical_tau, "tau_sim_se": math.nan,
            "s_sim": stats.empirical_s, "s_sim_se": math.nan}


def solve_point(config: RunConfig, with_sim: bool = False) -> dict:
    """Analytic (and optionally simulated) metrics at one configuration."""
    sol = solve_fixed_point(config.n, config.mac, config.channel)
    rep = saturation_throughput(sol, config.mac)
    row = {"tau": sol.tau, "p_col": sol.p_col, "p_cap": sol.p_cap, "p_cap_slot": sol.p_cap_slot,
           "p_e": sol.p_e, "p_tr": rep.p_tr, "p_s": rep.p_s, "s": rep.s, "s_mbps": rep.s_mbps,
           "iterations": sol.iterations, "residual": sol.residual}
    if with_sim:
        row.update(simulate_point(config))
    return row


def bianchi_point(config: RunConfig) -> dict:
    """Error-free, capture-free baseline on the same MAC parameters."""
    base = with_values(config, sinr_db=math.inf, capture_db=math.inf)
    sol = solve_fixed_point(base.n, base.mac, base.channel)
    oracle = bianchi_tau(base.n, base.mac.backoff)
    rep = saturation_throughput(sol, base.mac)
    return {"tau": oracle.tau, "s": rep.s}


# --- task evaluation (process-pool friendly) -------------------------------

@dataclass(frozen=True)
class Task:
    label: str
    config: RunConfig
    kind: str = "model"     # "model" or "bianchi"
    with_sim: bool = False


def _evaluate(task: Task):
    try:
        if task.kind == "bianchi":
            return bianchi_point(task.config), None
        return solve_point(task.config, task.with_sim), None
    except (ConvergenceError, DegenerateChainError, ValueError) as exc:
        return None, f"{task.label}: {exc}"


def evaluate_all(tasks: Sequence[Task], workers: int = 1) -> list[dict]:
    """Evaluate tasks in grid order; raises PointError listing every failure."""
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate, tasks))
    else:
        results = [_evaluate(t) for t in tasks]
    failures = [err for _, err in results if err is not None]
    if failures:
        raise PointError("\n".join(failures))
    return [row for row, _ in results]


# --- sweeps -------------------------------------------------------------------

SWEEP_COLUMNS = ["tau", "p_col", "p_cap", "p_cap_slot", "p_e", "p_tr", "p_s", "s", "s_mbps"]
SIM_COLUMNS = ["tau_sim", "tau_sim_se", "s_sim", "s_sim_se"]


def sweep(config: RunConfig, with_sim: bool = False) -> tuple[list[str], list[list]]:
    axis = config.sweep_axis
    integer = axis in ("stations", "payload_bytes")
    values = grid(config.sweep_start, config.sweep_stop, config.sweep_step, integer)
    tasks = [Task(f"{axis}={v}", with_values(config, **{AXIS_KEY[axis]: v}), with_sim=with_sim)
             for v in values]
    results = evaluate_all(tasks, config.workers)
    columns = [axis] + SWEEP_COLUMNS + (SIM_COLUMNS if with_sim else [])
    rows = [[v] + [r[c] for c in columns[1:]] for v, r in zip(values, results)]
    return columns, rows


# --- figure recipes -----------------------------------------------------------

@dataclass(frozen=True)
class Curve:
    column: str
    settings: tuple[tuple[str, object], ...]


@dataclass(frozen=True)
class FigureRecipe:
    fig_id: str
    axis: str                  # sweep key: sinr_db or n
    axis_column: str
    values: tuple
    fixed: tuple[tuple[str, object], ...]
    metric: str                # "tau" or "s"
    curves: tuple[Curve, ...]
    baseline: Optional[str]    # column name of the Bianchi baseline
    title: str


SINR_GRID = tuple(grid(0.0, 30.0, 1.0))


def _z(db):
    return Curve(f"s_z0_{db}db", (("capture_db", db),))


RECIPES: dict[str, FigureRecipe] = {r.fig_id: r for r in [
    FigureRecipe("fig3", "sinr_db", "sinr_db", SINR_GRID,
                 (("capture_db", 6.0), ("n", 10), ("payload_bytes", 1024)), "tau",
                 (Curve("tau_model", ()),), "tau_bianchi",
                 "Transmission probability vs SINR (z0 = 6 dB, n = 10, 1024 B)"),
    FigureRecipe("fig4", "n", "n", tuple(grid(2, 50, 2, integer=True)),
                 (("capture_db", 6.0), ("sinr_db", 7.0), ("payload_bytes", 1024)), "s",
                 (Curve("s_model", ()),), "s_bianchi",
                 "Saturation throughput vs stations (z0 = 6 dB, SINR = 7 dB, 1024 B)"),
    FigureRecipe("fig5", "sinr_db", "sinr_db", SINR_GRID,
                 (("n", 5), ("payload_bytes", 1024)), "s",
                 (_z(1), _z(10), _z(30)), "s_bianchi",
                 "Saturation throughput vs SINR (n = 5, 1024 B)"),
    FigureRecipe("fig6", "sinr_db", "sinr_db", SINR_GRID, (("n", 5),), "s",
                 tuple(Curve(f"s_{pl}b_z0_{db}db", (("payload_bytes", pl), ("capture_db", db)))
                       for pl in (1024, 128) for db in (6, 30)), None,
                 "Saturation throughput vs SINR (n = 5, payload 1024/128 B)"),
    FigureRecipe("fig7", "sinr_db", "sinr_db", SINR_GRID,
                 (("n", 2), ("payload_bytes", 1024)), "s",
                 (_z(6), _z(24)), None,
                 "Saturation throughput vs SINR (n = 2, 1024 B)"),
]}


def figure_columns(recipe: FigureRecipe, with_sim: bool = False) -> list[str]:
    cols = [recipe.axis_column] + [c.column for c in recipe.curves]
    if recipe.baseline:
        cols.append(recipe.baseline)
    if with_sim:
        cols += [c.column.replace("_model", "") + "_sim" for c in recipe.curves]
    return cols


def figure(fig_id: str, config: RunConfig, with_sim: bool = False) -> tuple[list[str], list[list]]:
    """Data of one figure as (columns, rows) ordered along the recipe grid."""
    if fig_id not in RECIPES:
        raise KeyError(f"unknown figure {fig_id!r}; choose from {', '.join(RECIPES)}")
    recipe = RECIPES[fig_id]
    base = with_values(config, **dict(recipe.fixed))
    tasks = []
    for v in recipe.values:
        point = with_values(base, **{recipe.axis: v})
        for curve in recipe.curves:
            tasks.append(Task(f"{fig_id} {recipe.axis}={v} {curve.column}",
                              with_values(point, **dict(curve.settings)), with_sim=with_sim))
        if recipe.baseline:
            tasks.append(Task(f"{fig_id} {recipe.axis}={v} {recipe.baseline}", point, kind="bianchi"))
    results = iter(evaluate_all(tasks, config.workers))
    rows = []
    metric = recipe.metric
    for v in recipe.values:
        row, sims = [v], []
        for _ in recipe.curves:
            r = next(results)
            row.append(r[metric])
            if with_sim:
                sims.append(r[f"{metric}_sim"])
        if recipe.baseline:
            row.append(next(results)[metric])
        rows.append(row + sims)
    return figure_columns(recipe, with_sim), rows


# --- output ---------------------------------------------------------------------

def format_number(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".9g")


def render_csv(columns: Sequence[str], rows: Sequence[Sequence]) -> str:
    width = len(columns)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if len(row) != width:
            raise ValueError(f"row has {len(row)} values, expected {width}")
        writer.writerow([format_number(v) for v in row])
    return buf.getvalue()


def emit_csv(columns: Sequence[str], rows: Sequence[Sequence], path) -> Path:
    path = Path(path)
    path.write_text(render_csv(columns, rows), encoding="utf-8")
    return path


def gnuplot_script(csv_path, columns: Sequence[str], title: str = "") -> str:
    csv_path = Path(csv_path)
    plots = ", \\\n     ".join(
        f"'{csv_path.name}' using 1:{i} with linespoints title columnheader({i})"
        for i in range(2, len(columns) + 1))
    return (f"set datafile separator ','\n"
            f"set key autotitle columnhead\n"
            f"set title '{title}'\n"
            f"set xlabel '{columns[0]}'\n"
            f"set grid\n"
            f"plot {plots}\n")
