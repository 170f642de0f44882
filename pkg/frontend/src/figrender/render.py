"""Render result CSVs into static figure images.

Never recomputes a metric: every plotted point comes from a CSV row, and the
sha256 of the consumed rows is embedded in the image metadata.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from . import schema  # noqa: E402
from .recipes import RECIPES, FigureRecipe  # noqa: E402


class RenderError(RuntimeError):
    pass


def _plot_panel(ax, rows, panel):
    consumed = []

    def draw(metric, series_keys, style, markers=False):
        groups = schema.series(rows, metric, panel.x_key, series_keys, **panel.filters)
        for label, (xs, ys, errs, raws) in sorted(groups.items()):
            consumed.extend(raws)
            if markers:
                ax.errorbar(xs, ys, yerr=errs, fmt="o", ms=3.5, capsize=2,
                            label=f"{label} ({metric})")
            else:
                ax.plot(xs, ys, style, label=f"{label} ({metric})")

    draw(panel.metric, panel.series_keys, "-")
    if panel.overlay_metric:
        draw(panel.overlay_metric, panel.overlay_series_keys, "--")
    if panel.marker_metric:
        draw(panel.marker_metric, panel.series_keys, "", markers=True)
    if panel.log_y:
        ax.set_yscale("log")
    ax.set_xlabel(panel.x_label or panel.x_key)
    ax.set_ylabel(panel.y_label or panel.metric)
    if panel.title:
        ax.set_title(panel.title, fontsize=9)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=6)
    return consumed


def render_figure(recipe: FigureRecipe, input_dir: Path, output_dir: Path) -> Path:
    rows = []
    for experiment in recipe.experiments:
        rows.extend(schema.load_experiment(input_dir, experiment))
    n_panels = len(recipe.panels)
    fig, axes = plt.subplots(1, n_panels, figsize=(5.2 * n_panels, 3.9))
    if n_panels == 1:
        axes = [axes]
    consumed = []
    try:
        for ax, panel in zip(axes, recipe.panels):
            consumed.extend(_plot_panel(ax, rows, panel))
    except schema.MissingSeries as err:
        plt.close(fig)
        raise RenderError(f"{recipe.figure_id}: missing series: {err}") from err
    fig.tight_layout()
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    out_path = output_dir / f"{recipe.figure_id}.png"
    digest = schema.rows_digest(consumed)
    fig.savefig(
        out_path, dpi=140,
        metadata={"Description": f"polarauth-rows-sha256:{digest}"},
    )
    plt.close(fig)
    return out_path


def render(figure_ids: list, input_dir, output_dir) -> list:
    """Render the requested figures; raises RenderError on unknown figures,
    missing experiments, or missing series."""
    paths = []
    for fid in figure_ids:
        recipe = RECIPES.get(fid)
        if recipe is None:
            raise RenderError(f"unknown figure id {fid!r}; known: {sorted(RECIPES)}")
        try:
            paths.append(render_figure(recipe, Path(input_dir), Path(output_dir)))
        except (schema.MissingSeries, schema.SchemaError) as err:
            raise RenderError(f"{fid}: {err}") from err
    return paths
