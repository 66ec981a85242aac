"""Command-line entry point.

Subcommands: ``landscape gen``, ``baselines``, ``train``, ``eval``,
``probe``, ``report``.  Exit codes: 0 success, 2 config error, 3 runtime
failure.
"""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np
import yaml

from . import landscape as nk
from . import presets, probe as probe_mod, topology as topo_mod
from .engine import ConfigError, EpisodeConfig, PeriodicReset, run_batch
from .observation import FeatureFlags
from .policy import load_checkpoint
from .runs import run_directory, write_manifest
from .strategies import ALL_BASELINES, StrategySpec
from .trainer import TrainConfig, train

CONFIG_SCHEMA_VERSION = 1


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_config(config_path, preset):
    cfg = presets.get(preset) if preset else presets.get("default")
    if config_path:
        with open(config_path) as fh:
            user = yaml.safe_load(fh) or {}
        if user.get("schema_version", CONFIG_SCHEMA_VERSION) != CONFIG_SCHEMA_VERSION:
            raise ConfigError(f"unsupported config schema {user['schema_version']}")
        for section, values in user.items():
            if isinstance(values, dict):
                cfg.setdefault(section, {}).update(values)
            else:
                cfg[section] = values
    return cfg


def _episode_config(cfg: dict) -> EpisodeConfig:
    env = cfg["environment"]
    schedule = env.get("schedule")
    return EpisodeConfig(
        n_agents=env.get("n_agents", 100),
        sample_size=env.get("sample_size", 3),
        steps=env.get("steps", 200),
        n_loci=env.get("n_loci", 15),
        k_inputs=env.get("k_inputs", 7),
        schedule=PeriodicReset(**schedule) if schedule else None,
    )


def _topology(cfg: dict, seed: int):
    spec = cfg.get("topology", {"kind": "complete"})
    kind = spec.get("kind", "complete")
    n = cfg["environment"].get("n_agents", 100)
    if kind == "complete":
        return topo_mod.complete(n)
    if kind == "maxmc":
        return topo_mod.max_mean_clustering(
            n, spec.get("degree", 19), spec.get("swap_budget", 200_000),
            seed=seed)
    if kind == "edge_list":
        return topo_mod.load_edge_list(spec["path"])
    raise ConfigError(f"unknown topology kind {kind!r}")


@click.group()
def main():
    """Social learning strategy laboratory."""


@main.group()
def landscape():
    """Landscape utilities."""


@landscape.command("gen")
@click.option("--n", "n_loci", type=int, required=True)
@click.option("--k", "k_inputs", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", type=click.Path(), required=True)
def landscape_gen(n_loci, k_inputs, seed, out):
    """Generate a seeded NK landscape file."""
    try:
        scape = nk.generate(n_loci, k_inputs, seed)
    except nk.LandscapeError as exc:
        _fail(2, str(exc))
    scape.save(out)
    click.echo(f"wrote {out} (p_max_raw={scape.p_max_raw:.6f})")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--preset", default=None)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), required=True)
@click.option("--workers", type=int, default=1)
@click.option("--strategies", "names", default=",".join(ALL_BASELINES),
              help="comma-separated strategy names")
def baselines(config_path, preset, seed, out, workers, names):
    """Run the baseline tournament and write curves + a ranked summary."""
    try:
        cfg = _load_config(config_path, preset)
        ep_cfg = _episode_config(cfg)
        topo = _topology(cfg, seed)
        specs = [StrategySpec.parse(s.strip()) for s in names.split(",")]
    except (ConfigError, ValueError, KeyError, OSError) as exc:
        _fail(2, str(exc))
    batch = cfg.get("batch", {})
    try:
        with run_directory(out):
            rows = []
            for spec in specs:
                stats = run_batch(
                    ep_cfg, topo, spec,
                    n_landscapes=batch.get("n_landscapes", 50),
                    reps_per_landscape=batch.get("reps_per_landscape", 100),
                    seed=seed, workers=workers)
                stats.write_csv(os.path.join(out, f"curve_{spec.name}.csv"))
                rows.append((spec.name, stats.average_mean_payoff,
                             stats.final_mean_payoff))
            rows.sort(key=lambda r: -r[1])
            with open(os.path.join(out, "summary.csv"), "w") as fh:
                fh.write("rank,strategy,average_mean_payoff,final_mean_payoff\n")
                for rank, (name, avg, fin) in enumerate(rows, 1):
                    fh.write(f"{rank},{name},{avg!r},{fin!r}\n")
            write_manifest(out, cfg, seed)
    except Exception as exc:
        _fail(3, str(exc))
    click.echo(f"baselines done; best = {rows[0][0]} ({rows[0][1]:.2f})")


def _train_config(cfg: dict) -> TrainConfig:
    t = dict(cfg.get("training", {}))
    flags = FeatureFlags.preset(t.pop("feature_preset", "PIRF"))
    curriculum = t.pop("curriculum", None)
    if curriculum:
        curriculum = [tuple(pair) for pair in curriculum]
    return TrainConfig(env=_episode_config(cfg), flags=flags,
                       curriculum=curriculum, **t)


@main.command("train")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--preset", default=None)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), required=True)
@click.option("--epochs", type=int, default=None,
              help="override the configured epoch budget")
def train_cmd(config_path, preset, seed, out, epochs):
    """Train a policy; writes metrics.csv and checkpoints."""
    try:
        cfg = _load_config(config_path, preset)
        train_cfg = _train_config(cfg)
        train_cfg.validate()
        topo = _topology(cfg, seed)
    except (ConfigError, ValueError, KeyError, TypeError, OSError) as exc:
        _fail(2, str(exc))
    try:
        with run_directory(out):
            train(train_cfg, seed, out_dir=out, topology=topo,
                  n_epochs=epochs)
            write_manifest(out, cfg, seed)
    except Exception as exc:
        _fail(3, str(exc))
    click.echo(f"training done; outputs in {out}")


@main.command("eval")
@click.option("--checkpoint", type=click.Path(exists=True), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--preset", default=None)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), required=True)
def eval_cmd(checkpoint, config_path, preset, seed, out):
    """Evaluate a frozen policy as a strategy in any environment."""
    try:
        cfg = _load_config(config_path, preset)
        ep_cfg = _episode_config(cfg)
        topo = _topology(cfg, seed)
        actor, _, meta = load_checkpoint(checkpoint)
        if actor.n_loci != ep_cfg.n_loci:
            raise ConfigError(
                f"checkpoint N={actor.n_loci} != environment N={ep_cfg.n_loci}")
    except (ConfigError, ValueError, KeyError, OSError) as exc:
        _fail(2, str(exc))
    batch = cfg.get("batch", {})
    try:
        with run_directory(out):
            stats = run_batch(
                ep_cfg, topo, actor,
                n_landscapes=batch.get("n_landscapes", 50),
                reps_per_landscape=batch.get("reps_per_landscape", 100),
                seed=seed, flags=actor.flags)
            stats.write_csv(os.path.join(out, "curve.csv"))
            with open(os.path.join(out, "summary.json"), "w") as fh:
                json.dump(stats.summary(), fh, indent=2)
            write_manifest(out, cfg, seed)
    except Exception as exc:
        _fail(3, str(exc))
    click.echo(f"eval done; average mean payoff {stats.average_mean_payoff:.2f}")


@main.command("probe")
@click.option("--checkpoint", type=click.Path(exists=True), required=True)
@click.option("--kind", type=click.Choice(["BI", "CF"]), default="BI")
@click.option("--p0", type=int, default=50)
@click.option("--stride", type=int, default=5)
@click.option("--out", type=click.Path(), required=True)
def probe_cmd(checkpoint, kind, p0, stride, out):
    """Probe a checkpoint with the payoff-sweep templates."""
    try:
        actor, _, meta = load_checkpoint(checkpoint)
        bi_tmpl, cf_tmpl = probe_mod.canonical_templates(actor.n_loci)
        template = bi_tmpl if kind == "BI" else cf_tmpl
    except (ValueError, KeyError, OSError) as exc:
        _fail(2, str(exc))
    try:
        with run_directory(out):
            tuples, probs = probe_mod.output_diagram(
                actor, template, p0, actor.flags)
            probe_mod.export_output_diagram(
                tuples, probs, os.path.join(out, f"output_{kind}.csv"))
            if kind == "BI":
                voxels = probe_mod.voxel_diagram(
                    actor, template, p0, stride, actor.flags)
                probe_mod.export_voxels(
                    voxels, os.path.join(out, "voxels.csv"))
                regions = probe_mod.region_averages(
                    actor, actor.n_loci, actor.flags)
                probe_mod.export_regions(
                    regions, os.path.join(out, "regions.json"))
            write_manifest(out, {"checkpoint": checkpoint, "kind": kind,
                                 "p0": p0, "stride": stride}, None)
    except Exception as exc:
        _fail(3, str(exc))
    click.echo(f"probe done; outputs in {out}")


@main.command("report")
@click.option("--run", "run_dir", type=click.Path(exists=True), required=True)
def report_cmd(run_dir):
    """Summarize a finished run directory from its manifest."""
    manifest_path = os.path.join(run_dir, "manifest.json")
    if not os.path.exists(manifest_path):
        _fail(2, f"{run_dir} has no manifest.json")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    click.echo(json.dumps({
        "run": run_dir,
        "seed": manifest.get("seed"),
        "code_version": manifest.get("code_version"),
        "files": sorted(manifest.get("checksums", {})),
    }, indent=2))


if __name__ == "__main__":
    main()
