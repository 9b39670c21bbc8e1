import pytest

from figtool.schemas import SchemaError, read_table

DATA = "data/regions_d4.csv"


def _data(path):
    import os

    return os.path.join(os.path.dirname(__file__), path)


def test_read_regions_fixture():
    table = read_table(_data(DATA), "regions")
    assert table.kind == "regions"
    assert len(table) == 1681
    assert set(table.columns) == {"s", "l", "in_lwp", "regime"}
    assert all(v in (0.0, 1.0) for v in table.columns["in_lwp"])


def test_unknown_kind():
    with pytest.raises(SchemaError, match="unknown figure kind"):
        read_table(_data(DATA), "heatmap")


def test_missing_file():
    with pytest.raises(SchemaError, match="No such file"):
        read_table(_data("data/nope.csv"), "regions")


def test_header_drift_names_columns(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("s,l,regime,extra\n0,0,I,1\n")
    with pytest.raises(SchemaError) as exc:
        read_table(str(p), "regions")
    msg = str(exc.value)
    assert "in_lwp" in msg  # missing column named
    assert "extra" in msg  # unexpected column named


def test_row_length_mismatch(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("s,l,in_lwp,regime\n0,0,1\n")
    with pytest.raises(SchemaError, match="expected 4 fields"):
        read_table(str(p), "regions")


def test_non_numeric_cell(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("c,n,n_scattered,p_hat,lo,hi\n1,abc,3,0.1,0.0,0.2\n")
    with pytest.raises(SchemaError, match="not a number"):
        read_table(str(p), "prob_curve")


def test_empty_table_reads_but_has_no_rows(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("c,n,n_scattered,p_hat,lo,hi\n")
    table = read_table(str(p), "prob_curve")
    assert len(table) == 0
