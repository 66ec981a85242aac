"""Figure renderer for social-learning experiment exports."""

from .render import (ema, output2d, payoff_curves, region_bars, save_figure,
                     training_curves, voxel3d)
from .schemas import (SchemaError, load_curve, load_metrics,
                      load_output_diagram, load_regions, load_voxels)

__all__ = [
    "ema", "output2d", "payoff_curves", "region_bars", "save_figure",
    "training_curves", "voxel3d", "SchemaError", "load_curve",
    "load_metrics", "load_output_diagram", "load_regions", "load_voxels",
]
