"""Figure rendering: a pure function of CSV content and style options."""
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .schemas import SchemaError, Table, read_table

REGIME_COLORS = {
    "I": "#4c72b0",
    "II": "#dd8452",
    "III": "#55a868",
    "Outside": "#eeeeee",
}

# strip volatile metadata so identical input bytes give identical output bytes
_SAVE_KW = {"dpi": 150, "metadata": {"Software": None}}


@dataclass
class FigureJob:
    kind: str  # regions | prob_curve | gbm_decay | traces
    inputs: list[str]
    output: str
    style: dict = field(default_factory=dict)


def regions_shaded_set(table: Table) -> set[tuple[float, float]]:
    """(s, l) points marked as inside the well-posedness region."""
    cols = table.columns
    return {
        (s, l)
        for s, l, flag in zip(cols["s"], cols["l"], cols["in_lwp"])
        if flag >= 0.5
    }


def _render_regions(table: Table, job: FigureJob, ax) -> None:
    cols = table.columns
    s = np.asarray(cols["s"])
    l = np.asarray(cols["l"])
    regime = cols["regime"]
    size = job.style.get("marker_size", 8.0)
    for name, color in REGIME_COLORS.items():
        mask = np.asarray([r == name for r in regime])
        if mask.any():
            ax.scatter(s[mask], l[mask], s=size, c=color, marker="s", label=name, linewidths=0)
    shaded = regions_shaded_set(table)
    if shaded:
        pts = np.asarray(sorted(shaded))
        ax.scatter(pts[:, 0], pts[:, 1], s=size * 0.25, c="#222222", marker=".", linewidths=0)
    ax.set_xlabel("s")
    ax.set_ylabel("l")
    ax.set_title(job.style.get("title", "regularity regions"))
    ax.legend(loc="upper left", fontsize=8)


def _render_prob_curve(table: Table, job: FigureJob, ax) -> None:
    if len(table) == 0:
        raise SchemaError("prob_curve: no data rows")
    cols = table.columns
    c = np.asarray(cols["c"])
    p = np.asarray(cols["p_hat"])
    lo = np.asarray(cols["lo"])
    hi = np.asarray(cols["hi"])
    ax.errorbar(c, p, yerr=[p - lo, hi - p], fmt="o-", capsize=3)
    ax.set_xlabel("noise strength c")
    ax.set_ylabel("scattering probability")
    ax.set_ylim(-0.05, 1.05)
    if job.style.get("log_x") and np.all(c > 0):
        ax.set_xscale("log")
    ax.set_title(job.style.get("title", "scattering probability vs noise strength"))


def _render_gbm_decay(table: Table, job: FigureJob, ax) -> None:
    if len(table) == 0:
        raise SchemaError("gbm_decay: no data rows")
    cols = table.columns
    c = np.asarray(cols["c"])
    p = np.asarray(cols["p_hat"])
    lo = np.asarray(cols["lo"])
    hi = np.asarray(cols["hi"])
    ax.errorbar(c, p, yerr=[p - lo, hi - p], fmt="s-", capsize=3)
    ax.set_xscale("log")
    ax.set_xlabel("c")
    ax.set_ylabel("exceedance probability")
    ax.set_title(job.style.get("title", "tail norm exceedance vs c"))


def _render_traces(tables: list[Table], job: FigureJob, ax) -> None:
    fields = job.style.get("fields", ["mass", "energy", "Hs_schro", "Hl_wave"])
    for idx, table in enumerate(tables):
        cols = table.columns
        t = np.asarray(cols["t"])
        for name in fields:
            label = name if len(tables) == 1 else f"{name} [{idx}]"
            if len(t) == 1:
                ax.plot(t, cols[name], "o", label=label)
            else:
                ax.plot(t, cols[name], label=label)
    ax.set_xlabel("t")
    ax.set_title(job.style.get("title", "trajectory norms"))
    ax.legend(fontsize=8)
    if job.style.get("log_y"):
        ax.set_yscale("log")


def render(job: FigureJob) -> str:
    """Render one figure job to its output path; returns the path."""
    if not job.inputs:
        raise SchemaError("job has no inputs")
    if job.kind != "traces" and len(job.inputs) != 1:
        raise SchemaError(f"kind {job.kind!r} takes exactly one input CSV")
    tables = [read_table(path, job.kind) for path in job.inputs]
    fig, ax = plt.subplots(figsize=job.style.get("figsize", (6.0, 4.5)))
    try:
        if job.kind == "regions":
            _render_regions(tables[0], job, ax)
        elif job.kind == "prob_curve":
            _render_prob_curve(tables[0], job, ax)
        elif job.kind == "gbm_decay":
            _render_gbm_decay(tables[0], job, ax)
        elif job.kind == "traces":
            _render_traces(tables, job, ax)
        else:
            raise SchemaError(f"unknown figure kind {job.kind!r}")
        fig.savefig(job.output, **_SAVE_KW)
    finally:
        plt.close(fig)
    return job.output
