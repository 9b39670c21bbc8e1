"""Acceptance gate for the figure tool: regions topology and determinism."""
import os

from figtool.render import FigureJob, regions_shaded_set, render
from figtool.schemas import read_table

HERE = os.path.dirname(__file__)
REGIONS_CSV = os.path.join(HERE, "data", "regions_d4.csv")


def _verdict(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_acceptance_regions_figure(tmp_path):
    table = read_table(REGIONS_CSV, "regions")
    shaded = regions_shaded_set(table)
    vertex_ok = (0.5, 0.0) in shaded
    excluded = [(2.0, 0.0), (2.0, 3.0)]
    excluded_ok = all(pt not in shaded for pt in excluded)

    out1 = tmp_path / "a.png"
    out2 = tmp_path / "b.png"
    render(FigureJob(kind="regions", inputs=[REGIONS_CSV], output=str(out1)))
    render(FigureJob(kind="regions", inputs=[REGIONS_CSV], output=str(out2)))
    deterministic = out1.read_bytes() == out2.read_bytes()

    _verdict(
        "regions-figure",
        vertex_ok and excluded_ok and deterministic,
        f"vertex (0.5, 0) shaded: {vertex_ok}, excluded points absent: {excluded_ok}, "
        f"byte-identical re-render: {deterministic}",
    )
