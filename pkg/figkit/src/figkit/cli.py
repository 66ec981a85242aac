"""``figkit <kind> --in <files> --out <image>`` batch renderer."""

from __future__ import annotations

import os
import sys

import click

from . import render, schemas


def _fail(message):
    click.echo(f"error: {message}", err=True)
    sys.exit(2)


@click.group()
def main():
    """Render figures from experiment export files."""


def _render_one(kind, paths, out, sem_multiplier=5.0, smoothing=0.99,
                formats=("svg", "png")):
    if kind == "voxel3d":
        fig = render.voxel3d(schemas.load_voxels(paths[0]))
    elif kind == "output2d":
        fig = render.output2d(*schemas.load_output_diagram(paths[0]))
    elif kind == "payoff_curves":
        curves = {}
        for path in paths:
            label = os.path.splitext(os.path.basename(path))[0]
            label = label.removeprefix("curve_")
            curves[label] = schemas.load_curve(path)
        fig = render.payoff_curves(curves, sem_multiplier)
    elif kind == "training_curves":
        fig = render.training_curves(schemas.load_metrics(paths[0]), smoothing)
    else:
        fig = render.region_bars(schemas.load_regions(paths[0]))
    return render.save_figure(fig, out, formats)


def _kind_command(kind, multi=False):
    @main.command(kind)
    @click.option("--in", "paths", type=click.Path(exists=True),
                  multiple=True, required=True)
    @click.option("--out", type=click.Path(), required=True)
    @click.option("--sem-multiplier", type=float, default=5.0,
                  show_default=True)
    @click.option("--smoothing", type=float, default=0.99, show_default=True)
    def command(paths, out, sem_multiplier, smoothing):
        if not multi and len(paths) != 1:
            _fail(f"{kind} takes exactly one --in file")
        try:
            written = _render_one(kind, list(paths), out,
                                  sem_multiplier, smoothing)
        except (schemas.SchemaError, ValueError, OSError) as exc:
            _fail(str(exc))
        click.echo("wrote " + ", ".join(written))

    command.__doc__ = f"Render a {kind} figure."
    return command


for _kind, _multi in (("voxel3d", False), ("output2d", False),
                      ("payoff_curves", True), ("training_curves", False),
                      ("region_bars", False)):
    _kind_command(_kind, _multi)


@main.command("frames")
@click.option("--in", "in_dir", type=click.Path(exists=True, file_okay=False),
              required=True)
@click.option("--kind", type=click.Choice(["voxel3d", "output2d"]),
              default="voxel3d", show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              required=True)
def frames(in_dir, kind, out_dir):
    """Render a directory of per-checkpoint exports as numbered frames."""
    suffix = "voxels.csv" if kind == "voxel3d" else "output_BI.csv"
    names = sorted(n for n in os.listdir(in_dir) if n.endswith(suffix))
    if not names:
        _fail(f"no *{suffix} files in {in_dir}")
    os.makedirs(out_dir, exist_ok=True)
    for index, name in enumerate(names):
        try:
            _render_one(kind, [os.path.join(in_dir, name)],
                        os.path.join(out_dir, f"frame_{index:04d}.png"),
                        formats=("png",))
        except (schemas.SchemaError, ValueError) as exc:
            _fail(f"{name}: {exc}")
    click.echo(f"wrote {len(names)} frames to {out_dir}")


if __name__ == "__main__":
    main()
