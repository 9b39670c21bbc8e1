import json
import os

import pytest

from figtool.cli import main
from figtool.render import FigureJob, regions_shaded_set, render
from figtool.schemas import SchemaError, read_table

HERE = os.path.dirname(__file__)
REGIONS_CSV = os.path.join(HERE, "data", "regions_d4.csv")


def test_regions_shaded_vertex_set():
    table = read_table(REGIONS_CSV, "regions")
    shaded = regions_shaded_set(table)
    assert (0.5, 0.0) in shaded  # endpoint vertex of the d=4 region
    assert (2.0, 0.0) not in shaded  # excluded corner points
    assert (2.0, 3.0) not in shaded
    assert (0.5, -1.0) not in shaded  # below the region


def test_regions_figure_renders_and_is_byte_deterministic(tmp_path):
    out1 = tmp_path / "regions_a.png"
    out2 = tmp_path / "regions_b.png"
    job1 = FigureJob(kind="regions", inputs=[REGIONS_CSV], output=str(out1))
    job2 = FigureJob(kind="regions", inputs=[REGIONS_CSV], output=str(out2))
    render(job1)
    render(job2)
    b1 = out1.read_bytes()
    b2 = out2.read_bytes()
    assert len(b1) > 1000
    assert b1 == b2


def test_empty_prob_curve_errors(tmp_path):
    p = tmp_path / "curve.csv"
    p.write_text("c,n,n_scattered,p_hat,lo,hi\n")
    job = FigureJob(kind="prob_curve", inputs=[str(p)], output=str(tmp_path / "c.png"))
    with pytest.raises(SchemaError, match="no data rows"):
        render(job)


def test_prob_curve_renders(tmp_path):
    p = tmp_path / "curve.csv"
    p.write_text(
        "c,n,n_scattered,p_hat,lo,hi\n"
        "0,200,0,0.0,0.0,0.019\n"
        "1,200,2,0.01,0.003,0.036\n"
        "4,200,143,0.715,0.649,0.773\n"
        "16,200,199,0.995,0.972,0.999\n"
    )
    out = tmp_path / "curve.png"
    render(FigureJob(kind="prob_curve", inputs=[str(p)], output=str(out)))
    assert out.stat().st_size > 1000


def test_gbm_decay_renders(tmp_path):
    p = tmp_path / "decay.csv"
    p.write_text(
        "c,s,p,eps,p_hat,lo,hi\n"
        "1,0.45,2,0.1,0.583,0.552,0.613\n"
        "8,0.45,2,0.1,0.104,0.087,0.124\n"
        "64,0.45,2,0.1,0.0,0.0,0.004\n"
    )
    out = tmp_path / "decay.png"
    render(FigureJob(kind="gbm_decay", inputs=[str(p)], output=str(out)))
    assert out.stat().st_size > 1000


def test_single_row_trace_renders_point(tmp_path):
    p = tmp_path / "trace.csv"
    p.write_text(
        "t,mass,energy,Hs_schro,Hl_wave,budget,h_value\n"
        "0,1.0,2.0,1.5,0.5,0.0,1.0\n"
    )
    out = tmp_path / "trace.png"
    render(FigureJob(kind="traces", inputs=[str(p)], output=str(out)))
    assert out.stat().st_size > 1000


def test_traces_multiple_inputs(tmp_path):
    rows = "t,mass,energy,Hs_schro,Hl_wave,budget,h_value\n" + "".join(
        f"{t},1.0,2.0,{1.0 + 0.1 * t},0.5,0.0,1.0\n" for t in range(5)
    )
    p1 = tmp_path / "a.csv"
    p2 = tmp_path / "b.csv"
    p1.write_text(rows)
    p2.write_text(rows)
    out = tmp_path / "traces.png"
    render(FigureJob(kind="traces", inputs=[str(p1), str(p2)], output=str(out)))
    assert out.stat().st_size > 1000


def test_unknown_kind_rejected(tmp_path):
    job = FigureJob(kind="pie", inputs=[REGIONS_CSV], output=str(tmp_path / "x.png"))
    with pytest.raises(SchemaError, match="unknown"):
        render(job)


def test_cli_batch(tmp_path, capsys):
    out = tmp_path / "regions.png"
    jobs = [{"kind": "regions", "inputs": [REGIONS_CSV], "output": str(out)}]
    jf = tmp_path / "jobs.json"
    jf.write_text(json.dumps(jobs))
    assert main(["--job", str(jf)]) == 0
    assert out.exists()
    assert "wrote" in capsys.readouterr().out


def test_cli_schema_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("wrong,header\n1,2\n")
    jf = tmp_path / "jobs.json"
    jf.write_text(
        json.dumps({"kind": "regions", "inputs": [str(bad)], "output": str(tmp_path / "x.png")})
    )
    assert main(["--job", str(jf)]) == 3
    err = capsys.readouterr().err
    assert "missing columns" in err


def test_cli_bad_job_file(tmp_path, capsys):
    jf = tmp_path / "jobs.json"
    jf.write_text("not json")
    assert main(["--job", str(jf)]) == 2
    jf2 = tmp_path / "missing.json"
    assert main(["--job", str(jf2)]) == 2
    jf3 = tmp_path / "empty.json"
    jf3.write_text("[]")
    assert main(["--job", str(jf3)]) == 2


def test_cli_job_missing_keys(tmp_path):
    jf = tmp_path / "jobs.json"
    jf.write_text(json.dumps([{"kind": "regions"}]))
    assert main(["--job", str(jf)]) == 2
