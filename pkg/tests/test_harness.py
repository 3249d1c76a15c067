import json

import pytest

from opgeom import cli
from opgeom.harness import (
    DEFAULT_TOLERANCES,
    PRESETS,
    SUITES,
    ConfigError,
    config_from_dict,
    emit_report,
    exit_code,
    load_config,
    preset_config,
    run_suites,
)


def small(name, samples=20, **extra):
    raw = preset_config(name)
    raw["chart"]["samples"] = samples
    raw.update(extra)
    return raw


# configuration


def test_every_preset_loads():
    for name in PRESETS:
        cfg = config_from_dict(preset_config(name))
        assert cfg.suites == list(SUITES)
        assert cfg.mass_values == [0.0, 1.0, 2.5]


def test_load_config_overrides(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(preset_config("minkowski")))
    cfg = load_config(path, seed=11, samples=7)
    assert cfg.seed == 11
    assert cfg.chart.sample_count == 7


def test_gauge_aliases_are_accepted():
    raw = small("minkowski")
    raw["gauges"] = [{"kind": "scalar_psi", "expr": "x1"}, {"kind": "sl2c_R", "matrix": [["1", "x2"], ["0", "1"]]}]
    assert [g.kind for g in config_from_dict(raw).gauges] == ["psi", "sl2c"]


def test_digest_tracks_content():
    a = config_from_dict(small("minkowski")).digest
    assert a == config_from_dict(small("minkowski")).digest
    assert a != config_from_dict(small("minkowski", seed=9)).digest


@pytest.mark.parametrize(
    "mutate, where",
    [
        (lambda r: r["operator"]["sigma"][0].__setitem__(0, ["0", "2*i"]), "operator.sigma[0]"),
        (lambda r: r["operator"]["sigma"][2].__setitem__(0, ["x1 +", "0"]), "operator.sigma[2][0][0]"),
        (lambda r: r.__setitem__("gauges", [{"kind": "sl2c", "matrix": [["2", "0"], ["0", "1"]]}]), "gauges[0]"),
        (lambda r: r.__setitem__("gauges", [{"kind": "lorentz", "matrix": [["1", "0"], ["0", "1"]]}]), "gauges[0]"),
        (lambda r: r.__setitem__("suites", ["theorem9"]), "suites"),
        (lambda r: r.__setitem__("mass_values", [-1]), "mass_values"),
        (lambda r: r.__setitem__("rho", "x1"), "rho"),
        (lambda r: r.__setitem__("negative_control", "swap"), "negative_control"),
        (lambda r: r.__setitem__("seed", -3), "seed"),
        (lambda r: r["operator"].pop("A"), "operator"),
    ],
)
def test_config_errors_name_the_block(mutate, where):
    raw = small("minkowski")
    mutate(raw)
    with pytest.raises(ConfigError) as info:
        config_from_dict(raw)
    assert str(info.value).startswith(where)


def test_invalid_json_is_a_config_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(path)


# running suites


def test_minkowski_passes_everything():
    reports = run_suites(config_from_dict(small("minkowski")))
    assert [r.suite for r in reports] == list(SUITES)
    assert all(r.passed for r in reports), [(r.suite, r.max_residual, r.error) for r in reports if not r.passed]
    by_name = {r.suite: r for r in reports}
    assert by_name["theorem1"].max_residual <= 1e-12
    assert exit_code(reports) == 0


def test_conformal_passes_everything():
    reports = run_suites(config_from_dict(small("conformal", samples=15)))
    assert all(r.passed for r in reports), [(r.suite, r.max_residual, r.error) for r in reports if not r.passed]


@pytest.mark.parametrize("name", ["em_wave", "conformal"])
def test_flipped_csub_fails_main_identity(name):
    cfg = config_from_dict(small(name, negative_control="flip_csub"))
    reports = {r.suite: r for r in run_suites(cfg, ["theorem1", "bispinor", "selfadjoint"])}
    assert reports["theorem1"].status == "FAIL"
    assert reports["bispinor"].status == "FAIL"
    assert reports["selfadjoint"].passed  # the flipped operator is still formally self-adjoint


def test_non_hermitian_raw_operator_fails_selfadjoint():
    raw = {
        "operator": {
            "P": [[["0", "-i"], ["-i", "0"]], [["0", "-1"], ["1", "0"]], [["-i", "0"], ["0", "i"]], [["-i", "0"], ["0", "-i"]]],
            "Q": [["0", "1"], ["0", "0"]],
        },
        "chart": {"samples": 10},
    }
    reports = {r.suite: r for r in run_suites(config_from_dict(raw), ["selfadjoint", "metric"])}
    assert reports["selfadjoint"].status == "FAIL"
    assert reports["selfadjoint"].max_residual == pytest.approx(1.0)
    assert reports["metric"].passed


def test_non_hermitian_principal_part_records_errors():
    raw = {
        "operator": {
            "P": [[["0", "1"], ["0", "0"]], [["0", "-1"], ["1", "0"]], [["-i", "0"], ["0", "i"]], [["-i", "0"], ["0", "-i"]]],
            "Q": [["0", "0"], ["0", "0"]],
        },
        "chart": {"samples": 10},
    }
    reports = {r.suite: r for r in run_suites(config_from_dict(raw), ["selfadjoint", "metric", "theorem1"])}
    assert all(r.status == "FAIL" for r in reports.values())
    assert reports["metric"].error and "GeometryError" in reports["metric"].error
    assert reports["metric"].to_dict()["max_residual"] is None


def test_unknown_suite_rejected_at_run_time():
    with pytest.raises(ConfigError):
        run_suites(config_from_dict(small("minkowski")), ["nope"])


def test_each_suite_has_a_tolerance():
    assert set(DEFAULT_TOLERANCES) == set(SUITES)


# reports


def test_report_orders_failures_first_and_follows_schema():
    cfg = config_from_dict(small("conformal", negative_control="flip_csub"))
    reports = run_suites(cfg, ["metric", "theorem1", "clifford"])
    doc = json.loads(emit_report(reports, "json", cfg))
    assert list(doc) == ["version", "config_digest", "seed", "suites"]
    assert [s["suite"] for s in doc["suites"]] == ["theorem1", "clifford", "metric"]
    entry = doc["suites"][0]
    assert list(entry) == ["suite", "status", "max_residual", "worst_point", "samples", "wall_time_s"]
    assert len(entry["worst_point"]["x"]) == 4 and len(entry["worst_point"]["p"]) == 4
    assert doc["suites"][2]["worst_point"]["p"] is None  # metric samples x only
    text = emit_report(reports, "text", cfg)
    assert text.splitlines()[1].startswith("FAIL  theorem1")
    assert text.rstrip().endswith("2/3 suites passed")


def test_reports_are_deterministic():
    def once():
        cfg = config_from_dict(small("sl2c_xdep", samples=10))
        return emit_report(run_suites(cfg), "json", cfg, timing=False)

    assert once() == once()


def test_seed_changes_samples():
    a = run_suites(config_from_dict(small("curved", samples=10)), ["metric"])[0]
    b = run_suites(config_from_dict(small("curved", samples=10, seed=1)), ["metric"])[0]
    assert a.worst_x != b.worst_x


# command line


def test_cli_preset_and_verify(tmp_path, capsys):
    path = tmp_path / "m.json"
    assert cli.main(["preset", "minkowski", "--out", str(path)]) == 0
    assert json.loads(path.read_text())["name"] == "minkowski"
    out = tmp_path / "report.json"
    code = cli.main(["verify", str(path), "--suite", "theorem1", "--suite", "clifford", "--format", "json",
                     "--samples", "10", "--seed", "4", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["seed"] == 4
    assert {s["suite"] for s in doc["suites"]} == {"theorem1", "clifford"}


def test_cli_exit_code_on_failure(tmp_path, capsys):
    raw = small("em_wave", negative_control="flip_csub")
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(raw))
    assert cli.main(["verify", str(path), "--suite", "theorem1"]) == 1
    assert "FAIL  theorem1" in capsys.readouterr().out


def test_cli_exit_code_on_config_error(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("[1, 2")
    assert cli.main(["verify", str(path)]) == 2
    assert "config error" in capsys.readouterr().err
    assert cli.main(["verify", str(tmp_path / "missing.json")]) == 2


def test_cli_rejects_unknown_suite(tmp_path):
    with pytest.raises(SystemExit) as info:
        cli.main(["verify", "x.json", "--suite", "bogus"])
    assert info.value.code == 2
