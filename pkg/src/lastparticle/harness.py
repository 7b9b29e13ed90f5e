"""Experiment harness: configs, replicated runs, reports, and figure data.

A run is described by an :class:`ExperimentConfig` (usually parsed from a
flat ``key = value`` config file, see :func:`parse_config_text`), executed
by :func:`run_experiment` into a plain-dict report with one entry per
replicate plus summary statistics, and serialized by :func:`save_report`
as ``report.json`` + ``replicates.csv``.  :func:`emit_figure_data` turns a
report into the CSV behind each supported figure.

Replicate k draws every bit of its randomness from substream (k) of the
master seed, so reports are reproducible regardless of the worker count
(wall-time fields excepted).
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .analytic import AnalyticModel
from .baseline import McResult, rmse, simple_mc, vlmc
from .last_particle import (EstimateResult, confidence_interval, run_ideal,
                            run_practical, substream)
from .model_1d import Kernel1DParams, Model1D, Model1DParams
from .model_2d import Kernel2DParams, Model2D, Model2DParams

__all__ = [
    "ExperimentConfig",
    "parse_config_text",
    "load_config",
    "build_model",
    "run_experiment",
    "save_report",
    "load_report",
    "emit_figure_data",
    "coverage_check",
    "FIGURE_IDS",
]

_MODELS = ("one_d", "two_d", "analytic")
_METHODS = ("last_particle", "simple_mc", "vlmc", "ideal")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment."""

    model: str
    method: str
    seed: int = 0
    n_particles: int = 200
    hm_rounds: int = 300
    n_trials: int = 1_000_000
    batch_size: int = 10_000_000
    level: float = 0.0
    replicates: int = 1
    workers: int = 1
    confidence: float = 0.95
    out: str | None = None
    p_ref: float | None = None
    # 1D model
    lower: float = -10.0
    upper: float = 1.0
    sigma2: float = 1.0
    p_absorb: float = 0.0
    sigma2_tilde: float = 0.01
    q_flip: float = 0.0
    # 2D model
    L: float = 10.0
    l: float = 2.0
    l_d: float = 0.5
    d_x: float = 3.0
    s_x: float = 3.0
    lambda_w: float = 0.2
    lambda_p: float = 2.0
    P_w: float = 0.2
    P_p: float = 0.5
    Q_w: float = 0.05
    Q_p: float = 0.1
    # analytic model
    p_target: float | None = None

    def __post_init__(self):
        if self.model not in _MODELS:
            raise ValueError(f"model must be one of {_MODELS}")
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.method == "ideal" and self.model != "analytic":
            raise ValueError("the ideal driver needs the analytic model")

    @property
    def effective_level(self) -> float:
        if self.model == "analytic" and self.p_target is not None:
            return AnalyticModel.level_for(self.p_target)
        return self.level

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_INT_KEYS = {"seed", "n_particles", "hm_rounds", "n_trials", "batch_size",
             "replicates", "workers"}
_FLOAT_KEYS = {"level", "confidence", "p_ref", "lower", "upper", "sigma2",
               "p_absorb", "sigma2_tilde", "q_flip", "L", "l", "l_d", "d_x",
               "s_x", "lambda_w", "lambda_p", "P_w", "P_p", "Q_w", "Q_p",
               "p_target"}
_STR_KEYS = {"model", "method", "out"}


def parse_config_text(text: str) -> dict:
    """Parse the flat ``key = value`` config format.

    One assignment per line; ``#`` starts a comment; strings may be quoted;
    numeric values are coerced by the key's declared type.  Unknown keys
    are rejected so typos fail loudly.
    """
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "'\"":
            value = value[1:-1]
        if key in _INT_KEYS:
            out[key] = int(value)
        elif key in _FLOAT_KEYS:
            out[key] = float(value)
        elif key in _STR_KEYS:
            out[key] = value
        else:
            raise ValueError(f"line {lineno}: unknown config key {key!r}")
    return out


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    values = parse_config_text(Path(path).read_text())
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


def build_model(config: ExperimentConfig):
    if config.model == "one_d":
        params = Model1DParams(lower=config.lower, upper=config.upper,
                               sigma2=config.sigma2, p_absorb=config.p_absorb)
        kparams = Kernel1DParams(sigma2_tilde=config.sigma2_tilde,
                                 q_flip=config.q_flip)
        return Model1D(params, kparams)
    if config.model == "two_d":
        params = Model2DParams(L=config.L, l=config.l, l_d=config.l_d,
                               d_x=config.d_x, s_x=config.s_x,
                               lambda_w=config.lambda_w, lambda_p=config.lambda_p,
                               P_w=config.P_w, P_p=config.P_p)
        kparams = Kernel2DParams(sigma2_tilde=config.sigma2_tilde,
                                 Q_w=config.Q_w, Q_p=config.Q_p)
        return Model2D(params, kparams)
    return AnalyticModel()


def _run_replicate(config: ExperimentConfig, index: int) -> dict:
    """One replicate; never raises, aborts are recorded in the row."""
    model = build_model(config)
    root = np.random.SeedSequence(entropy=config.seed, spawn_key=(index,))
    level = config.effective_level
    try:
        if config.method == "last_particle":
            result = run_practical(model, config.n_particles, config.hm_rounds,
                                   level, root)
        elif config.method == "ideal":
            result = run_ideal(model, config.n_particles, level, root)
        elif config.method == "simple_mc":
            result = simple_mc(model, config.n_trials, level, root,
                               confidence=config.confidence)
        else:
            ckpt = None
            if config.out is not None:
                ckpt = Path(config.out) / f"vlmc_{index:04d}.ckpt"
                ckpt.parent.mkdir(parents=True, exist_ok=True)
            result = vlmc(model, config.n_trials, level, config.seed + index,
                          batch_size=config.batch_size, checkpoint=ckpt,
                          confidence=config.confidence)
    except Exception as exc:  # replicate aborts are data, not crashes
        return {"index": index, "status": "aborted",
                "error": f"{type(exc).__name__}: {exc}", "result": None}
    return {"index": index, "status": "ok", "error": None,
            "result": result.to_dict()}


def coverage_check(estimates, p_ref: float, n_particles: int) -> float:
    """Fraction of estimates whose own confidence interval covers p_ref."""
    estimates = list(estimates)
    if not estimates:
        raise ValueError("need at least one estimate")
    hits = 0
    for p_hat in estimates:
        low, high = confidence_interval(float(p_hat), n_particles)
        if low <= p_ref <= high:
            hits += 1
    return hits / len(estimates)


def _summarize(config: ExperimentConfig, rows: list[dict]) -> dict:
    ok = [r["result"] for r in rows if r["status"] == "ok"]
    n_aborted = sum(1 for r in rows if r["status"] != "ok")
    summary: dict = {"replicates": len(rows), "ok": len(ok),
                     "aborted": n_aborted, "level": config.effective_level}
    if not ok:
        return summary
    key = "p_hat" if config.method in ("last_particle", "ideal") else "p_tilde"
    est = np.array([r[key] for r in ok])
    summary["estimates_key"] = key
    summary["mean"] = float(est.mean())
    summary["sd"] = float(est.std(ddof=1)) if est.size > 1 else 0.0
    summary["median"] = float(np.median(est))
    if np.all(est > 0):
        summary["geometric_mean"] = float(np.exp(np.mean(np.log(est))))
    summary["mean_wall_time"] = float(np.mean([r["wall_time"] for r in ok]))
    if config.method in ("last_particle", "ideal"):
        summary["mean_m"] = float(np.mean([r["m"] for r in ok]))
        summary["tie_warnings"] = int(sum(r["tie_warnings"] for r in ok))
    if config.p_ref is not None:
        summary["p_ref"] = config.p_ref
        summary["rmse"] = rmse(est, config.p_ref)
        if config.method in ("last_particle", "ideal"):
            summary["coverage_fraction"] = coverage_check(
                est, config.p_ref, config.n_particles)
    return summary


def run_experiment(config: ExperimentConfig) -> dict:
    """Run the configured replicates and return the full report dict."""
    idx = range(config.replicates)
    if config.workers > 1 and config.replicates > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(_run_replicate, [config] * config.replicates, idx))
    else:
        rows = [_run_replicate(config, i) for i in idx]
    rows.sort(key=lambda r: r["index"])
    return {"config": config.to_dict(),
            "summary": _summarize(config, rows),
            "replicates": rows}


def save_report(report: dict, out_dir) -> Path:
    """Write report.json plus a replicates.csv of the scalar columns."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True))
    method = report["config"]["method"]
    header = (EstimateResult.csv_header()
              if method in ("last_particle", "ideal") else McResult.csv_header())
    with open(out / "replicates.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rep", "status"] + header)
        for row in report["replicates"]:
            if row["status"] != "ok":
                writer.writerow([row["index"], row["status"]] + [""] * len(header))
                continue
            r = row["result"]
            if method in ("last_particle", "ideal"):
                rec = EstimateResult.from_dict(r).csv_row()
            else:
                rec = McResult(**r).csv_row()
            writer.writerow([row["index"], "ok"] + rec)
    return out / "report.json"


def load_report(path) -> dict:
    return json.loads(Path(path).read_text())


FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4", "fig5", "table_quality")
_SCATTER_FIGURES = {"fig1", "fig2", "fig3", "fig5"}


def emit_figure_data(report: dict, figure_id: str, out_path) -> Path:
    """Write the CSV data behind one figure of the replication study.

    Scatter figures (fig1/fig2/fig3/fig5) need a last-particle report and
    produce one row per replicate with the estimate and its interval;
    fig4 traces the first replicate's per-iteration HM acceptance rate;
    table_quality expects a report dict with precomputed quality fields.
    """
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    method = report.get("config", {}).get("method")
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if figure_id in _SCATTER_FIGURES:
            if method not in ("last_particle", "ideal"):
                raise ValueError(f"{figure_id} needs a particle-method report")
            writer.writerow(["rep", "p_hat", "I_p_low", "I_p_high"])
            for row in report["replicates"]:
                if row["status"] != "ok":
                    continue
                r = row["result"]
                writer.writerow([row["index"], repr(r["p_hat"]),
                                 repr(r["ci_low"]), repr(r["ci_high"])])
        elif figure_id == "fig4":
            if method != "last_particle":
                raise ValueError("fig4 needs a last_particle report")
            ok = [r for r in report["replicates"] if r["status"] == "ok"]
            if not ok:
                raise ValueError("no completed replicate to trace")
            writer.writerow(["level_iteration", "mean_acceptance"])
            for i, rate in enumerate(ok[0]["result"]["acceptance_log"], start=1):
                writer.writerow([i, repr(rate)])
        elif figure_id == "table_quality":
            q = report.get("quality")
            if not q:
                raise ValueError("report carries no quality comparison")
            writer.writerow(["time_mc", "rmse_mc", "time_lp", "rmse_lp", "ratio"])
            writer.writerow([repr(q["time_mc"]), repr(q["rmse_mc"]),
                             repr(q["time_lp"]), repr(q["rmse_lp"]),
                             repr(q["ratio"])])
        else:
            raise ValueError(f"unknown figure id {figure_id!r}; "
                             f"known: {', '.join(FIGURE_IDS)}")
    return out_path
