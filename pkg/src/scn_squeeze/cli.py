"""Config-driven experiment runner.

``scn-squeeze run config.json`` executes one named study deterministically
from a master seed and persists JSON results, CSV plot series, and rendered
PNG figures to the output directory.  ``scn-squeeze validate config.json``
checks the config against the bundled schema without computing anything.

Exit codes: 0 success, 1 numeric/convergence failure, 2 config error.
"""

from __future__ import annotations

import hashlib
import importlib.resources
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import jsonschema
import numpy as np

from . import frequency, plots
from .errors import ScnSqueezeError
from .gaussian import haar_unitary, make_covariance, random_bmd
from .learning import SAMPLED_DEFAULTS, OptimizerConfig, SampledSource, learn_network
from .mesh import circuit_unitary
from .seeding import rng_from, split_seed
from .serialize import dumps_17g, write_csv

FORMAT_VERSION = 1

KNOWN_TOP_LEVEL = {"kind", "seed", "output_dir", "params"}


def _schema() -> dict:
    text = importlib.resources.files("scn_squeeze").joinpath("config_schema.json").read_text()
    return json.loads(text)


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise click.ClickException(f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        raise _config_error(f"config is not valid JSON: {exc}")


class _ConfigError(Exception):
    pass


def _config_error(msg: str) -> _ConfigError:
    return _ConfigError(msg)


def _validate_config(cfg: dict) -> None:
    try:
        jsonschema.validate(cfg, _schema())
    except jsonschema.ValidationError as exc:
        path = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise _ConfigError(f"config field {path}: {exc.message}")
    extras = set(cfg) - KNOWN_TOP_LEVEL
    if extras:
        click.echo(f"warning: ignoring unknown config fields: {sorted(extras)}", err=True)


def _config_hash(cfg: dict) -> str:
    # output_dir is excluded: it does not affect the numbers, and runs into
    # different directories should still be byte-identical
    stripped = {k: v for k, v in cfg.items() if k != "output_dir"}
    canonical = json.dumps(stripped, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _provenance(cfg: dict) -> dict:
    return {"config_hash": _config_hash(cfg), "format_version": FORMAT_VERSION}


def _csv_comments(cfg: dict) -> list[str]:
    return [f"config_hash={_config_hash(cfg)}", f"format_version={FORMAT_VERSION}"]


def _pmap(fn, items, threads: int):
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _ground_truth(params: dict, seed: int, default_loss: float = 0.1):
    return random_bmd(
        n_modes=params["n_modes"],
        r_min=params.get("r_min", 0.1),
        r_max=params.get("r_max", 1.2),
        min_gap=params.get("min_gap", 0.1),
        loss_p=params.get("loss_p", default_loss),
        seed=seed,
    )


def _write_learning_artifacts(out: Path, cfg, truth, circuit, records, fid_history):
    comments = _csv_comments(cfg)
    write_csv(
        out / "fidelity_history.csv",
        ["layer", "fidelity"],
        [(i + 1, f) for i, f in enumerate(fid_history)],
        comments=comments,
    )
    rows = []
    for rec in records:
        rows.extend((rec.layer_index, t, c) for t, c in enumerate(rec.cost_history, start=1))
    write_csv(out / "cost_history.csv", ["layer", "iteration", "cost"], rows, comments=comments)
    plots.plot_fidelity_history(fid_history, out / "fidelity_history.png")
    plots.plot_cost_histories([rec.cost_history for rec in records], out / "cost_history.png")


def _run_learn_spatial(cfg: dict, out: Path) -> str:
    params = cfg.get("params", {})
    seed = cfg["seed"]
    truth = _ground_truth(params, split_seed(seed, 0))
    gamma = make_covariance(truth)
    mode = params.get("mode", "exact")
    if mode == "sampled":
        source = SampledSource(
            gamma,
            phases=None if "phase_count" not in params else np.arange(params["phase_count"]) * (2 * np.pi / params["phase_count"]),
            m=params.get("samples_per_phase", 10_000),
        )
        opt = OptimizerConfig(**SAMPLED_DEFAULTS)
    else:
        source = gamma
        opt = OptimizerConfig()
    n = params["n_modes"]
    n_layers = params.get("n_layers", n)
    circuit, records, fid_history = learn_network(
        source, n, n_layers, cfg=opt, seed=split_seed(seed, 1), ground_truth=truth
    )
    _write_learning_artifacts(out, cfg, truth, circuit, records, fid_history)
    result = {
        **_provenance(cfg),
        "kind": cfg["kind"],
        "fidelity": fid_history[-1],
        "fidelity_history": fid_history,
        "final_costs": [rec.final_cost for rec in records],
        "converged_at": [rec.converged_at for rec in records],
    }
    (out / "result.json").write_text(dumps_17g(result))
    return f"fidelity={fid_history[-1]:.4f}"


def _run_learn_frequency_uniform(cfg: dict, out: Path) -> str:
    params = cfg.get("params", {})
    seed = cfg["seed"]
    truth = _ground_truth(params, split_seed(seed, 0))
    gamma = make_covariance(truth)
    n = params["n_modes"]
    circuit, records, fid_history = learn_network(
        gamma, n, n, cfg=OptimizerConfig(), seed=split_seed(seed, 1), ground_truth=truth
    )
    learned_u = circuit_unitary(circuit)
    stack, design_fid = frequency.inverse_design(
        learned_u,
        params.get("n_cavities", n),
        params.get("gamma", 1.0),
        restarts=params.get("restarts", 5),
        kind="toeplitz",
        seed=split_seed(seed, 2),
    )
    _write_learning_artifacts(out, cfg, truth, circuit, records, fid_history)
    (out / "cavity_stack.json").write_text(stack.to_json())
    result = {
        **_provenance(cfg),
        "kind": cfg["kind"],
        "learning_fidelity": fid_history[-1],
        "design_fidelity": design_fid,
        "fidelity_history": fid_history,
    }
    (out / "result.json").write_text(dumps_17g(result))
    return f"fidelity={fid_history[-1]:.4f} design_fidelity={design_fid:.4f}"


def _run_learn_frequency_nonuniform(cfg: dict, out: Path) -> str:
    params = cfg.get("params", {})
    seed = cfg["seed"]
    truth = _ground_truth(params, split_seed(seed, 0), default_loss=0.0)
    n = params["n_modes"]
    ladder = frequency.FrequencyLadder(n_modes=n, fsr=1.0, dispersion=params.get("dispersion", 0.05))
    _, _, t0 = frequency.pair_tones(ladder)
    hold_time = params.get("hold_ratio", 10.0) * t0
    survival = params.get("survival", 0.9)
    gamma_i = -np.log(survival) / hold_time
    gamma_e = params.get("gamma_e", 1.0)
    fid, records = frequency.nonuniform_protocol_sim(
        truth,
        ladder,
        gamma_e=gamma_e,
        gamma_i=gamma_i,
        hold_time=hold_time,
        bandwidth=params.get("bandwidth"),
        seed=split_seed(seed, 1),
    )
    comments = _csv_comments(cfg)
    rows = []
    for rec in records:
        rows.extend((rec.layer_index, t, c) for t, c in enumerate(rec.cost_history, start=1))
    write_csv(out / "cost_history.csv", ["layer", "iteration", "cost"], rows, comments=comments)
    plots.plot_cost_histories([rec.cost_history for rec in records], out / "cost_history.png")
    result = {
        **_provenance(cfg),
        "kind": cfg["kind"],
        "fidelity": fid,
        "hold_time": hold_time,
        "t0": t0,
        "loss_p": 1.0 - survival,
        "final_costs": [rec.final_cost for rec in records],
        "converged_at": [rec.converged_at for rec in records],
    }
    (out / "result.json").write_text(dumps_17g(result))
    return f"fidelity={fid:.4f}"


def _run_inverse_design(cfg: dict, out: Path, threads: int) -> str:
    params = cfg.get("params", {})
    seed = cfg["seed"]
    n = params["n_modes"]
    kind = params.get("coupling", "toeplitz")
    n_cavities = params.get("n_cavities", n if kind == "toeplitz" else 2)
    gamma = params.get("gamma", 1.0)
    restarts = params.get("restarts", 5)
    n_targets = params.get("n_targets", 10)

    def one(k: int):
        target = haar_unitary(n, rng_from(split_seed(seed, 0, k)))
        return frequency.inverse_design(
            target, n_cavities, gamma, restarts=restarts, kind=kind, seed=split_seed(seed, 1, k)
        )

    results = _pmap(one, range(n_targets), threads)
    fids = [fid for _, fid in results]
    best_idx = int(np.argmax(fids))
    write_csv(
        out / "targets.csv",
        ["target", "fidelity"],
        [(k, f) for k, f in enumerate(fids)],
        comments=_csv_comments(cfg),
    )
    (out / "best_stack.json").write_text(results[best_idx][0].to_json())
    median = float(np.median(fids))
    result = {
        **_provenance(cfg),
        "kind": cfg["kind"],
        "coupling": kind,
        "n_cavities": n_cavities,
        "fidelities": fids,
        "median_fidelity": median,
        "best_target": best_idx,
    }
    (out / "result.json").write_text(dumps_17g(result))
    return f"median_fidelity={median:.4f}"


def _run_trotter_scaling(cfg: dict, out: Path, threads: int) -> str:
    params = cfg.get("params", {})
    n_list = params.get("n_list", [4, 8])
    ratios = params.get("ratios", [2, 5, 10, 20, 50])
    seeds = params.get("seeds", 3)
    dispersion = params.get("dispersion", 0.05)
    fid_tol = params.get("fid_tol", 1e-8)

    def one(n):
        return frequency.trotter_scaling_study(
            n_list=[n], ratios=ratios, seeds=seeds, dispersion=dispersion,
            fid_tol=fid_tol, base_seed=cfg["seed"],
        )

    rows = [row for chunk in _pmap(one, n_list, threads) for row in chunk]
    write_csv(
        out / "trotter_scaling.csv",
        ["n", "ratio", "infidelity", "seed"],
        [(r["n"], r["ratio"], r["infidelity"], r["seed"]) for r in rows],
        comments=_csv_comments(cfg),
    )
    slopes = {}
    series = {}
    for n in n_list:
        means = [
            float(np.mean([r["infidelity"] for r in rows if r["n"] == n and r["ratio"] == ratio]))
            for ratio in ratios
        ]
        slopes[str(n)] = frequency.fit_loglog_slope(ratios, means)
        series[f"N={n}"] = means
    envelope_c = max(r["infidelity"] * r["ratio"] ** 2 for r in rows)
    plots.plot_scaling(
        ratios, series, out / "trotter_scaling.png",
        xlabel="T / T0", ylabel="infidelity",
        bound=[envelope_c / ratio**2 for ratio in ratios],
    )
    result = {
        **_provenance(cfg),
        "kind": cfg["kind"],
        "slopes": slopes,
        "envelope_constant": envelope_c,
    }
    (out / "result.json").write_text(dumps_17g(result))
    mean_slope = float(np.mean(list(slopes.values())))
    return f"slope={mean_slope:.3f}"


def _run_magnus_scaling(cfg: dict, out: Path, threads: int) -> str:
    params = cfg.get("params", {})
    n_list = params.get("n_list", [4, 6, 8, 10])
    finesse = params.get("finesse", 1000.0)
    seeds = params.get("seeds", 20)
    amplitude = params.get("amplitude", 0.25)

    def one(n):
        return frequency.magnus_scaling_study(
            n_list=[n], finesse=finesse, seeds=seeds, amplitude=amplitude, base_seed=cfg["seed"]
        )[0]

    rows = _pmap(one, n_list, threads)
    write_csv(
        out / "magnus_scaling.csv",
        ["n", "finesse", "infidelity_mean", "infidelity_std"],
        [(r["n"], r["finesse"], r["infidelity_mean"], r["infidelity_std"]) for r in rows],
        comments=_csv_comments(cfg),
    )
    means = [r["infidelity_mean"] for r in rows]
    slope = frequency.fit_loglog_slope(n_list, means)
    bound_c = max(
        r["infidelity_mean"] / (r["n"] ** 2 / (np.pi * finesse)) ** 2 for r in rows
    )
    plots.plot_scaling(
        n_list, {"mean infidelity": means}, out / "magnus_scaling.png",
        xlabel="N", ylabel="infidelity",
        bound=[bound_c * (n**2 / (np.pi * finesse)) ** 2 for n in n_list],
    )
    result = {
        **_provenance(cfg),
        "kind": cfg["kind"],
        "slope": slope,
        "bound_constant": bound_c,
    }
    (out / "result.json").write_text(dumps_17g(result))
    return f"slope={slope:.3f}"


@click.group()
def main():
    """Deterministic studies of variationally processed multimode squeezed light."""


@main.command()
@click.argument("config_path", type=click.Path())
@click.option("--output-dir", type=click.Path(), default=None, help="Override the config's output directory.")
@click.option("--seed", type=int, default=None, help="Override the config's master seed.")
@click.option("--threads", type=int, default=None, help="Parallelism cap (default: SCN_SQUEEZE_THREADS or 1).")
def run(config_path, output_dir, seed, threads):
    """Execute the study named in the config and persist its artifacts."""
    try:
        cfg = _load_config(config_path)
        _validate_config(cfg)
    except _ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    if output_dir is not None:
        cfg["output_dir"] = output_dir
    if seed is not None:
        cfg["seed"] = seed
    if threads is None:
        threads = int(os.environ.get("SCN_SQUEEZE_THREADS", "1"))
    out = Path(cfg.get("output_dir", "."))
    out.mkdir(parents=True, exist_ok=True)

    runners = {
        "learn-spatial": lambda: _run_learn_spatial(cfg, out),
        "learn-frequency-uniform": lambda: _run_learn_frequency_uniform(cfg, out),
        "learn-frequency-nonuniform": lambda: _run_learn_frequency_nonuniform(cfg, out),
        "inverse-design": lambda: _run_inverse_design(cfg, out, threads),
        "trotter-scaling": lambda: _run_trotter_scaling(cfg, out, threads),
        "magnus-scaling": lambda: _run_magnus_scaling(cfg, out, threads),
    }
    try:
        summary = runners[cfg["kind"]]()
    except ScnSqueezeError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(summary)


@main.command()
@click.argument("config_path", type=click.Path())
def validate(config_path):
    """Check a config against the schema without running anything."""
    try:
        cfg = _load_config(config_path)
        _validate_config(cfg)
    except _ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo("ok")


if __name__ == "__main__":
    main()
