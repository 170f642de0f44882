"""Figure recipes: which experiments feed each figure and how axes map."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Panel:
    metric: str                  # solid-line metric
    x_key: str
    series_keys: tuple
    filters: dict = field(default_factory=dict)
    overlay_metric: str | None = None   # dashed overlay (e.g. a bound)
    overlay_series_keys: tuple = ()
    marker_metric: str | None = None    # point markers (e.g. MC validation)
    log_y: bool = False
    x_label: str = ""
    y_label: str = ""
    title: str = ""


@dataclass(frozen=True)
class FigureRecipe:
    figure_id: str
    experiments: tuple
    panels: tuple
    description: str


RECIPES = {
    "fig5": FigureRecipe(
        "fig5", ("detect-sweep",),
        (
            Panel(
                metric="p_d", x_key="snr_db", series_keys=("Ke", "L"),
                overlay_metric="p_d_union_bound", overlay_series_keys=("Ke",),
                x_label="SNR (dB)", y_label="detection probability",
                title="Detection vs SNR by list length, union bound dashed",
            ),
        ),
        "detection probability per list length with union bound overlay",
    ),
    "fig6": FigureRecipe(
        "fig6", ("taglen-sweep",),
        (
            Panel(
                metric="p_d", x_key="snr_db", series_keys=("Ne", "scheme"),
                x_label="SNR (dB)", y_label="detection probability",
                title="Coded tag vs uncoded baseline across tag lengths",
            ),
        ),
        "proposed vs baseline detection across tag lengths",
    ),
    "fig7": FigureRecipe(
        "fig7", ("interference-sweep",),
        (
            Panel(
                metric="p_d", x_key="sinr_db", series_keys=("Ne", "scheme"),
                x_label="SINR (dB)", y_label="detection probability",
                title="Detection under multiuser interference (SNR 0 dB)",
            ),
        ),
        "proposed vs baseline detection vs SINR",
    ),
    "fig8": FigureRecipe(
        "fig8", ("eaves-position",),
        (
            Panel(
                metric="p_err_analytic", x_key="snr_db", series_keys=("Ne",),
                marker_metric="p_err_mc",
                x_label="eavesdropper SNR (dB)", y_label="P_err",
                title="Per-position classification error",
            ),
            Panel(
                metric="p_pcc_analytic", x_key="snr_db", series_keys=("Ne",),
                log_y=True,
                x_label="eavesdropper SNR (dB)", y_label="P_PCC",
                title="All-positions-correct probability",
            ),
        ),
        "eavesdropper position-confusion curves, two panels",
    ),
    "fig9": FigureRecipe(
        "fig9", ("eaves-tag",),
        (
            Panel(
                metric="noise_power_max", x_key="snr_db", series_keys=(),
                overlay_metric="noise_power_raw", marker_metric="noise_power_avg",
                log_y=True,
                x_label="eavesdropper SNR (dB)", y_label="noise power",
                title="Tag-estimation noise accumulation vs SNR",
            ),
        ),
        "accumulated noise power vs SNR",
    ),
    "fig10": FigureRecipe(
        "fig10", ("eaves-tag",),
        (
            Panel(
                metric="noise_power_max_vs_len", x_key="Ne", series_keys=(),
                overlay_metric="noise_power_raw_vs_len",
                marker_metric="noise_power_avg_vs_len", log_y=True,
                x_label="tag length", y_label="noise power",
                title="Tag-estimation noise accumulation vs tag length",
            ),
        ),
        "accumulated noise power vs tag length",
    ),
    "fig11": FigureRecipe(
        "fig11", ("spoof-sd",),
        (
            Panel(
                metric="p_sd_analytic", x_key="N", series_keys=("Ne",),
                marker_metric="p_sd",
                x_label="message length", y_label="normalized symmetric difference",
                title="Spoofer/legitimate position misalignment",
            ),
        ),
        "normalized symmetric difference vs message and tag lengths",
    ),
    "fig12": FigureRecipe(
        "fig12", ("ber-bound",),
        (
            Panel(
                metric="ber_bound", x_key="snr_db", series_keys=("Ne",),
                marker_metric="ber_mc", log_y=True,
                x_label="SNR (dB)", y_label="message BER",
                title="Unaware-receiver BER bound (markers: simulation)",
            ),
            Panel(
                metric="ber_bound", x_key="Ne", series_keys=("snr_db",),
                log_y=True,
                x_label="tag length", y_label="message BER",
                title="BER bound vs tag length",
            ),
        ),
        "unaware-receiver BER bound vs SNR and tag length",
    ),
}
