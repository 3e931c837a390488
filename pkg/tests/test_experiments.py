import json
import math

import pytest

from tailrisk import cli
from tailrisk import experiments as ex
from tailrisk.errors import DomainError
from tailrisk.experiments import ExperimentConfig

SMALL = 10**5

GOLDEN_HEADERS = {
    "table2": "alpha,VaR_MC,VaR_1st,VaR_2nd,CTE_MC,CTE_1st,CTE_2nd,VaR_1st/MC,VaR_2nd/MC,CTE_1st/MC,CTE_2nd/MC,"
              "VaR_MC_se,CTE_MC_se,VaR_2nd_theorem,CTE_2nd_theorem",
    "table3": "p,E_MC,E_1st,E_2nd,CE_MC,CE_1st,CE_2nd,E_1st/MC,E_2nd/MC,CE_1st/MC,CE_2nd/MC,"
              "E_MC_se,CE_MC_se,E_2nd_theorem,CE_2nd_theorem",
    "table4": "p,ICE_MC,ICE_1st,ICE_2nd,ICE_1st/MC,ICE_2nd/MC,ICE_MC_se,ICE_2nd_theorem",
    "table5": "p,SICE_MC,SICE_1st,SICE_2nd,SICE_1st/MC,SICE_2nd/MC,SICE_MC_se,SICE_2nd_theorem",
}
FIGURE_HEADER = "panel,measure,p,mc,mc_stderr,first,second,ratio_first,ratio_second"


def _all_configs():
    for spec in ex.TABLES.values():
        for cfg in spec.configs():
            yield cfg
    for spec in ex.FIGURES.values():
        for _, cfg in spec.panels:
            yield cfg


def _write_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc, indent=2) if not isinstance(doc, str) else doc)
    return str(path)


# -- configuration --------------------------------------------------------------------------


def test_builtin_configs_round_trip():
    configs = list(_all_configs())
    assert len(configs) >= 20
    for cfg in configs:
        doc = json.loads(json.dumps(cfg.to_dict()))
        assert ExperimentConfig.from_dict(doc) == cfg


def test_config_validation():
    base = ex.TABLES["table2"].configs()[0].to_dict()
    with pytest.raises(DomainError, match="p_grid"):
        ExperimentConfig.from_dict({**base, "p_grid": [1.5]})
    with pytest.raises(DomainError, match="<root>"):
        ExperimentConfig.from_dict({**base, "extra": 1})
    with pytest.raises(DomainError):
        ExperimentConfig.from_dict({**base, "mc": {"samples": 100}})
    with pytest.raises(DomainError):
        ExperimentConfig(base["model"], (0.99, 0.95), ("VaR",))
    with pytest.raises(DomainError):
        ExperimentConfig(base["model"], (0.99,), ("ES",))


def test_replace_ignores_none():
    cfg = ex.TABLES["table2"].configs()[0]
    assert cfg.replace(samples=None, seed=None) == cfg
    assert cfg.replace(seed=3).seed == 3


def test_syntax_error_reports_line(tmp_path):
    path = _write_config(tmp_path, '{\n  "model": {},\n  "p_grid": [0.99,,]\n}\n')
    with pytest.raises(ex.ConfigSyntaxError) as info:
        ex.load_config(path)
    assert info.value.lineno == 3
    assert "line 3" in str(info.value)


# -- tables and figures ---------------------------------------------------------------------


@pytest.mark.parametrize("table_id", sorted(GOLDEN_HEADERS))
def test_table_headers_are_stable(table_id):
    assert ",".join(ex.table_columns(ex.TABLES[table_id])) == GOLDEN_HEADERS[table_id]


def test_figure_header_is_stable():
    assert ",".join(ex.FIGURE_COLUMNS) == FIGURE_HEADER


def test_table_csv_is_identical_across_workers():
    texts = []
    for workers in (1, 4):
        cols, recs = ex.run_table("table2", samples=SMALL, workers=workers)
        texts.append(ex.format_csv(cols, recs))
    assert texts[0] == texts[1]
    lines = texts[0].split("\r\n")
    assert lines[0] == GOLDEN_HEADERS["table2"]
    assert [line.split(",")[0] for line in lines[1:-1]] == ["1.1", "1.5", "2", "2.5", "3", "4", "5"]


def test_eval_reproduces_table_row(tmp_path):
    _, recs = ex.run_table("table2", samples=SMALL)
    cfg = dict(ex.TABLES["table2"].entries)[2.0].replace(samples=SMALL)
    report = ex.evaluate_config(ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))))
    rows = {r["measure"]: r for r in report["results"]}
    rec = recs[2]
    for m in ("VaR", "CTE"):
        assert rows[m]["mc_value"] == rec[f"{m}_MC"]
        assert rows[m]["second_order"] == rec[f"{m}_2nd"]
        assert rows[m]["mc_stderr"] == rec[f"{m}_MC_se"]
    assert report["admissibility"]["admissible"]
    assert report["acceptance_rate"] == 1.0


def test_figure_normalisation():
    cols, recs = ex.run_figure("fig3", samples=SMALL)
    assert cols == ex.FIGURE_COLUMNS
    assert {r["panel"] for r in recs} == {"a12=-1", "a12=0", "a12=1"}
    var = [r for r in recs if r["measure"] == "VaR"]
    # independence panel: VaR/q of the sum approaches 2^{1/2} at first order
    for r in var:
        assert r["first"] == pytest.approx(math.sqrt(2), rel=1e-12)
        assert r["ratio_second"] == pytest.approx(r["second"] / r["mc"], rel=1e-12)


def test_unknown_ids():
    with pytest.raises(DomainError):
        ex.run_table("table9")
    with pytest.raises(DomainError):
        ex.run_figure("fig1")


def test_format_csv():
    text = ex.format_csv(["a", "b", "c"], [{"a": "x,y", "b": 1 / 3, "c": float("nan")}], digits=3)
    assert text == 'a,b,c\r\n"x,y",0.333,nan\r\n'
    doc = json.loads(ex.format_json(["a"], [{"a": 1.5}]))
    assert doc == {"columns": ["a"], "rows": [{"a": 1.5}]}


def test_minimal_config(tmp_path):
    doc = {
        "model": {"n": 1, "a": [[0]], "marginal": {"family": "pareto", "alpha": 2, "k": 1}, "kernels": [{"kernel": "fgm"}]},
        "p_grid": [0.99],
        "measures": ["VaR"],
        "mc": {"samples": 10**6, "seed": 1},
    }
    report = ex.evaluate_config(ex.load_config(_write_config(tmp_path, doc)))
    (row,) = report["results"]
    assert row["first_order"] == row["second_order"] == pytest.approx(9.0)
    assert abs(row["mc_value"] - 9.0) < 3 * row["mc_stderr"]
    assert report["marginal"]["mean"] == 1.0


# -- command line ---------------------------------------------------------------------------------


def test_cli_table_to_file(tmp_path, capsys):
    out = tmp_path / "t2.csv"
    assert cli.main(["table", "table2", "--samples", "1e5", "--out", str(out)]) == 0
    data = out.read_bytes()
    assert data.startswith(GOLDEN_HEADERS["table2"].encode() + b"\r\n")
    assert cli.main(["table", "table2", "--samples", "10**5", "--workers", "3", "--out", str(tmp_path / "b.csv")]) == 0
    assert (tmp_path / "b.csv").read_bytes() == data


def test_cli_json_and_digits(capsys):
    assert cli.main(["table", "table2", "--samples", "1e5", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["columns"][0] == "alpha" and len(doc["rows"]) == 7
    assert cli.main(["table", "table2", "--samples", "1e5", "--digits", "3"]) == 0
    lines = capsys.readouterr().out.split("\r\n")[1:-1]
    for line in lines:
        for cell in line.split(",")[1:]:
            mantissa = cell.lstrip("-").split("e")[0].replace(".", "").lstrip("0")
            assert len(mantissa) <= 3, cell
    cols, recs = ex.run_table("table2", samples=SMALL)
    assert lines[2].split(",")[2] == f"{recs[2]['VaR_1st']:.3g}"


def test_cli_eval_formats(tmp_path, capsys):
    doc = ex.TABLES["table2"].configs()[2].replace(samples=SMALL).to_dict()
    path = _write_config(tmp_path, doc)
    assert cli.main(["eval", path, "--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert set(report) >= {"config", "admissibility", "acceptance_rate", "runtime_seconds", "results"}
    assert cli.main(["eval", path]) == 0
    assert capsys.readouterr().out.startswith("measure,p,mc_value")


def test_cli_eval_uses_config_output(tmp_path):
    target = tmp_path / "res.json"
    doc = ex.TABLES["table2"].configs()[2].replace(samples=SMALL).to_dict()
    doc["output"] = {"path": str(target), "format": "json"}
    assert cli.main(["eval", _write_config(tmp_path, doc)]) == 0
    assert json.loads(target.read_text())["results"][0]["measure"] == "VaR"


def test_cli_inadmissible_model_exit_code(tmp_path, capsys):
    doc = {
        "model": {"n": 2, "a": [[0, 2], [2, 0]], "marginal": {"family": "pareto", "alpha": 2, "k": 1},
                  "kernels": [{"kernel": "fgm"}, {"kernel": "fgm"}]},
        "p_grid": [0.99],
        "measures": ["VaR"],
        "mc": {"samples": 10**4},
    }
    assert cli.main(["eval", _write_config(tmp_path, doc)]) == 2
    err = capsys.readouterr().err
    assert "corner" in err and "-1" in err


def test_cli_invalid_config_exit_codes(tmp_path, capsys):
    assert cli.main(["eval", _write_config(tmp_path, '{\n  "model": 1,\n  oops\n}')]) == 2
    assert "line 3" in capsys.readouterr().err
    doc = {"model": {"n": 1}, "p_grid": [0.99], "measures": ["VaR"], "colour": "red"}
    assert cli.main(["eval", _write_config(tmp_path, doc)]) == 2


def test_cli_io_exit_code(tmp_path, capsys):
    assert cli.main(["eval", str(tmp_path / "missing.json")]) == 3
    bad_out = tmp_path / "no" / "such" / "dir.csv"
    assert cli.main(["table", "table2", "--samples", "1e5", "--out", str(bad_out)]) == 3


def test_cli_insufficient_exceedances_exit_code(capsys):
    # p = 0.9999 with 10^5 draws leaves 10 exceedances
    assert cli.main(["table", "table3", "--samples", "1e5"]) == 4
    assert "exceedances" in capsys.readouterr().err


def test_cli_bad_count():
    with pytest.raises(SystemExit):
        cli.main(["table", "table2", "--samples", "1.5"])
