import json

import pytest
from hypothesis import given, strategies as st

from eden_bounds import BoxConfig, diag_lower_bound
from eden_bounds import report as rp
from eden_bounds.cli import main, parse_dims
from eden_bounds.report import (DimensionReport, build_report, find_disproof_dimension,
                                from_csv, from_json, to_csv, to_json, to_table)

FAST = BoxConfig.preset("fast")

finite = st.floats(1e-6, 2.0, allow_nan=False, allow_infinity=False)


@st.composite
def reports(draw):
    rows = []
    for d in sorted(draw(st.sets(st.integers(2, 60), min_size=1, max_size=5))):
        if draw(st.booleans()):
            rows.append(DimensionReport.failed(d, draw(st.text(
                st.characters(blacklist_categories=("Cs", "Cc")), max_size=20))))
            continue
        levels = draw(st.integers(1, 5))
        upper = {lv: draw(finite) for lv in range(1, levels + 1)}
        rows.append(DimensionReport.from_bounds(d, upper, {lv: 0.5 for lv in upper}))
    return rows


@given(reports())
def test_csv_round_trip(rows):
    back = from_csv(to_csv(rows))
    strip = [DimensionReport(r.d, r.diag_lower, r.axis_upper, r.first_disproving_level,
                             r.verdict, {}, r.error) for r in rows]
    assert back == strip


@given(reports())
def test_json_round_trip(rows):
    back, meta = from_json(to_json(rows, FAST, "fast"))
    assert back == rows
    assert meta["config"] == FAST.to_dict() and meta["mode"] == "fast"
    assert BoxConfig.from_dict(meta["config"]) == FAST


def test_csv_columns():
    header = to_csv([]).splitlines()[0]
    assert header == ("d,diag_lower,tau1,tau2_over_2,tau3_over_3,tau4_over_4,tau5_over_5,"
                      "first_disproving_level,verdict")


def test_verdict_logic():
    d = 30
    diag = diag_lower_bound(d)
    r = DimensionReport.from_bounds(d, {1: diag + 0.01, 2: diag + 0.001, 3: diag - 1e-9})
    assert r.verdict and r.first_disproving_level == 3
    r = DimensionReport.from_bounds(d, {1: diag + 0.01})
    assert not r.verdict and r.first_disproving_level is None


def test_report_rows_sorted_and_failures_isolated(monkeypatch):
    real = rp.chain_bounds

    def flaky(d, max_level, config):
        if d == 4:
            raise RuntimeError("boom")
        return real(d, max_level, config)

    monkeypatch.setattr(rp, "chain_bounds", flaky)
    rows = build_report([5, 2, 4, 3], 2, FAST)
    assert [r.d for r in rows] == [2, 3, 4, 5]
    assert rows[2].error == "RuntimeError: boom" and not rows[2].verdict
    assert all(r.error is None for r in rows if r.d != 4)


def test_report_with_process_pool():
    serial = build_report([2, 3, 22], 2, FAST)
    pooled = build_report([22, 3, 2], 2, FAST, workers=2)
    strip = lambda rows: [(r.d, r.axis_upper) for r in rows]  # noqa: E731
    assert strip(serial) == strip(pooled)


def test_axis_upper_non_increasing():
    (row,) = build_report([3], 5, FAST)
    vals = [row.axis_upper[lv] for lv in range(1, 6)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_table_rounds_directionally():
    row = DimensionReport.from_bounds(22, {1: 0.0933142, 2: 0.0811522})
    text = to_table([row])
    assert "0.0934" in text and "0.0812" in text and "0.0706" in text


def test_table_marks_first_disproof():
    row = DimensionReport.from_bounds(35, {1: 0.0642, 2: 0.05567})
    assert "0.0557*" in to_table([row])


def test_level1_never_disproves_in_fast_mode():
    assert find_disproof_dimension(1, range(2, 41), FAST) is None


def test_bad_level():
    with pytest.raises(ValueError):
        build_report([3], 6, FAST)


# ---- CLI ------------------------------------------------------------------

@pytest.mark.parametrize("text,dims", [("22", [22]), ("2-4", [2, 3, 4]),
                                       ("2,5-6,5", [2, 5, 6])])
def test_parse_dims(text, dims):
    assert parse_dims(text) == dims


def test_cli_compute_json(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["compute", "--dim", "3", "--levels", "2", "--format", "json",
                 "--out", str(out)]) == 0
    rows, meta = from_json(out.read_text())
    assert rows[0].d == 3 and set(rows[0].axis_upper) == {1, 2}
    assert meta["version"]


def test_cli_scan_csv(capsys):
    assert main(["scan", "--dim", "2-3", "--levels", "1", "--format", "csv"]) == 0
    rows = from_csv(capsys.readouterr().out)
    assert [r.d for r in rows] == [2, 3]


def test_cli_custom_box(capsys):
    assert main(["compute", "--dim", "4", "--levels", "2", "--mode", "custom",
                 "--box", "500,50x20"]) == 0
    assert "E tau2/2" in capsys.readouterr().out


def test_cli_config_file(tmp_path, capsys):
    path = tmp_path / "c.json"
    BoxConfig.parse_box("500,50x20").to_file(path)
    assert main(["compute", "--dim", "4", "--levels", "2", "--config", str(path),
                 "--format", "csv"]) == 0


def test_cli_mc(capsys):
    assert main(["mc", "--dim", "2", "--levels", "1", "--samples", "2000",
                 "--seed", "1", "--format", "json"]) == 0
    (rec,) = json.loads(capsys.readouterr().out)
    assert rec["samples"] == 2000 and rec["mean"] > 0


def test_cli_check_passes(capsys):
    assert main(["check", "--dim", "2-3", "--levels", "2", "--samples", "5000"]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_cli_check_fails_on_bad_bound(monkeypatch, capsys):
    from eden_bounds import cli

    def fake(dims, levels, cfg, **kw):
        return [DimensionReport.from_bounds(d, {1: 0.01}) for d in dims]

    monkeypatch.setattr(cli, "build_report", fake)
    assert main(["check", "--dim", "2", "--levels", "1", "--samples", "2000"]) == 1
    assert "FAIL" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["compute", "--dim", "1"],
    ["compute", "--dim", "3", "--mode", "custom"],
    ["compute", "--dim", "3", "--box", "10,5x50"],
])
def test_cli_errors_exit_nonzero(argv, capsys):
    assert main(argv) != 0


def test_cli_rejects_bad_level():
    with pytest.raises(SystemExit) as exc:
        main(["compute", "--dim", "3", "--levels", "9"])
    assert exc.value.code != 0
