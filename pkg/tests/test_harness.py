"""Config grammar, sweep driver, CSV stability, and the command-line surface."""

import io
import subprocess
import sys

import pytest

from halftrap.harness.config import (
    ConfigError,
    ExperimentConfig,
    apply_overrides,
    parse_config_text,
)
from halftrap.harness.sweep import (
    evaluate_point,
    run_sweep,
    write_plot_data,
    write_sweep_csv,
)
from halftrap.moments import moments_from_state
from halftrap.states import number_state


def _cli(args, env, cwd=None, input_text=None):
    return subprocess.run(
        [sys.executable, "-m", "halftrap.harness.cli", *args],
        capture_output=True,
        text=True,
        env=env,
        cwd=cwd,
        input=input_text,
        timeout=300,
    )


# ---------------------------------------------------------------- config


def test_parse_config_basics():
    text = """
    # run shape
    state = number
    number_n = 3   # inline comment
    table.K = 64

    sweep.values = 1, 2, 3
    """
    entries = parse_config_text(text)
    assert entries == {
        "state": "number",
        "number_n": "3",
        "table.K": "64",
        "sweep.values": "1, 2, 3",
    }


def test_parse_config_duplicate_key_rejected():
    with pytest.raises(ConfigError) as err:
        parse_config_text("seed = 1\nseed = 2\n")
    assert err.value.fieldname == "seed"
    assert "line 2" in str(err.value)


def test_parse_config_missing_equals_names_line():
    with pytest.raises(ConfigError) as err:
        parse_config_text("state = coherent\nnonsense\n")
    assert err.value.fieldname == "line 2"


def test_apply_overrides():
    base = {"state": "coherent", "seed": "1"}
    merged = apply_overrides(base, ["seed=99", "table.K = 32"])
    assert merged == {"state": "coherent", "seed": "99", "table.K": "32"}
    assert base["seed"] == "1"
    with pytest.raises(ConfigError):
        apply_overrides(base, ["no-equals-here"])


def test_from_entries_defaults_and_types():
    cfg = ExperimentConfig.from_entries({})
    assert cfg.state == "coherent"
    assert cfg.K == 512
    assert cfg.extrapolate is True
    cfg2 = ExperimentConfig.from_entries(
        {"state": "thermal", "nbar": "0.5", "moments.extrapolate": "false", "seed": "7"}
    )
    assert cfg2.nbar == 0.5
    assert cfg2.extrapolate is False
    assert cfg2.seed == 7


@pytest.mark.parametrize(
    "entries, field",
    [
        ({"table.K": "0"}, "table.K"),
        ({"table.K": "lots"}, "table.K"),
        ({"state": "squeezed"}, "state"),
        ({"accept.mu_tol": "-1"}, "accept.mu_tol"),
        ({"sweep.param": "alpha_sq"}, "sweep.values"),
        ({"state": "superposition"}, "coeffs"),
        ({"probe.levels": "1"}, "probe.levels"),
        ({"moments.extrapolate": "maybe"}, "moments.extrapolate"),
        ({"number_n": "-2"}, "number_n"),
    ],
)
def test_validation_names_the_field(entries, field):
    with pytest.raises(ConfigError) as err:
        ExperimentConfig.from_entries(entries)
    assert err.value.fieldname == field


def test_seeded_generator_is_reproducible():
    cfg = ExperimentConfig.from_entries({"seed": "42"})
    a = cfg.seeded_generator().random(5)
    b = cfg.seeded_generator().random(5)
    assert (a == b).all()


# ---------------------------------------------------------------- sweep


def test_run_sweep_requires_sweep_param():
    cfg = ExperimentConfig.from_entries({})
    with pytest.raises(ConfigError) as err:
        run_sweep(cfg)
    assert err.value.fieldname == "sweep.param"


def test_number_sweep_matches_closed_form(table512, cache_dir):
    cfg = ExperimentConfig.from_entries(
        {
            "state": "number",
            "sweep.param": "number_n",
            "sweep.values": "2, 3, 5",
            "table.cache_dir": cache_dir,
        }
    )
    results = run_sweep(cfg, table=table512)
    assert [r.value for r in results] == [2.0, 3.0, 5.0]
    for r, expected in zip(results, (1.0 / 6.0, 0.25, 1.0 / 3.0)):
        assert r.error == ""
        assert r.mu == pytest.approx(expected, abs=1e-6)
        assert r.mu_closed_form == pytest.approx(expected, rel=1e-15)
        assert r.fidelity is None
        assert r.provenance == "extrapolated-K"
        assert 0.0 < r.p_succ < 1.0


def test_sweep_point_error_is_reported_not_raised(table512, cache_dir):
    # the inverse-quartic preset needs a coherent amplitude; a number state
    # cannot supply one, so the row carries the failure instead of the run
    cfg = ExperimentConfig.from_entries(
        {
            "state": "number",
            "pulse.preset": "inverse-quartic",
            "sweep.param": "number_n",
            "sweep.values": "2",
            "table.cache_dir": cache_dir,
        }
    )
    (row,) = run_sweep(cfg, table=table512)
    assert row.error != ""
    assert row.mu != row.mu  # NaN


def test_csv_bytes_are_stable(table512, cache_dir):
    cfg = ExperimentConfig.from_entries(
        {
            "sweep.param": "alpha_sq",
            "sweep.values": "1, 2",
            "table.cache_dir": cache_dir,
        }
    )
    results = run_sweep(cfg, table=table512)
    bufs = []
    for _ in range(2):
        buf = io.StringIO()
        write_sweep_csv(results, buf)
        bufs.append(buf.getvalue())
    assert bufs[0] == bufs[1]
    header = bufs[0].splitlines()[0]
    assert header.startswith("param,value,mu,mu_closed_form,fidelity,p_succ")
    # 17 significant digits survive a text round trip
    row = bufs[0].splitlines()[1].split(",")
    assert float(row[2]) == results[0].mu


def test_wall_time_column_only_on_request(table512, cache_dir):
    cfg = ExperimentConfig.from_entries(
        {
            "sweep.param": "alpha_sq",
            "sweep.values": "2",
            "timing": "true",
            "table.cache_dir": cache_dir,
        }
    )
    results = run_sweep(cfg, table=table512)
    assert results[0].wall_time is not None and results[0].wall_time > 0
    quiet, timed = io.StringIO(), io.StringIO()
    write_sweep_csv(results, quiet)
    write_sweep_csv(results, timed, timing=True)
    q_row = quiet.getvalue().splitlines()[1].split(",")
    t_row = timed.getvalue().splitlines()[1].split(",")
    assert q_row[-2] == ""
    assert t_row[-2] != ""


def test_plot_data_rows(table512, cache_dir):
    cfg = ExperimentConfig.from_entries(
        {
            "sweep.param": "alpha_sq",
            "sweep.values": "1, 4",
            "table.cache_dir": cache_dir,
        }
    )
    results = run_sweep(cfg, table=table512)
    buf = io.StringIO()
    write_plot_data(results, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "series,x,y"
    series = [ln.split(",")[0] for ln in lines[1:]]
    # coherent points carry all three series
    assert series.count("mu") == 2
    assert series.count("mu_closed_form") == 2
    assert series.count("fidelity") == 2


def test_fock_path_agrees_with_series_route(table6, cache_dir):
    cfg = ExperimentConfig.from_entries(
        {
            "state": "number",
            "number_n": "2",
            "path": "fock",
            "table.K": "6",
            "fock.n_max": "4",
            "table.cache_dir": cache_dir,
        }
    )
    row = evaluate_point(cfg, table6)
    assert row.error == ""
    assert row.provenance == "fock-K"
    reference = moments_from_state(number_state(2), table6)
    assert row.mLL == pytest.approx(reference.mLL, rel=1e-12)
    assert row.mu == pytest.approx(
        abs(reference.mLR) / (reference.mLL + reference.mRR), rel=1e-12
    )


# ---------------------------------------------------------------- CLI


def test_cli_lambda_writes_table(tmp_path, cli_env):
    out = tmp_path / "overlaps.csv"
    proc = _cli(["lambda", "--K", "6", "--out", str(out)], cli_env)
    assert proc.returncode == 0, proc.stderr
    lines = out.read_text().splitlines()
    assert lines[0] == "k,l,lambdaL,lambdaR"
    assert len(lines) == 1 + 6 * 6
    assert "quadrature error" in proc.stdout


def test_cli_sweep_with_config_file(tmp_path, cli_env):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text(
        "state = coherent\n"
        "table.K = 32\n"
        "sweep.param = alpha_sq\n"
        "sweep.values = 1, 2\n"
        "moments.extrapolate = false\n"
    )
    out = tmp_path / "sweep.csv"
    proc = _cli(
        ["sweep", "--config", str(cfg_file), "--out", str(out)], cli_env
    )
    assert proc.returncode == 0, proc.stderr
    lines = out.read_text().splitlines()
    assert lines[0].startswith("param,value,mu")
    assert len(lines) == 3
    assert lines[1].startswith("alpha_sq,1,")


def test_cli_validate_report(cli_env):
    proc = _cli(["validate", "--set", "table.K=64"], cli_env)
    assert proc.returncode == 0, proc.stderr
    assert "fitted exponent" in proc.stdout
    assert "identically at every K" in proc.stdout


def test_cli_sample_deterministic(cli_env):
    args = [
        "sample",
        "--set",
        "pulse.area=1.0",
        "--set",
        "table.K=32",
        "--set",
        "moments.extrapolate=false",
        "--shots",
        "1000",
        "--seed",
        "7",
    ]
    first = _cli(args, cli_env)
    second = _cli(args, cli_env)
    assert first.returncode == 0, first.stderr
    assert first.stdout == second.stdout
    assert "p_succ = " in first.stdout
    assert "success = " in first.stdout


def test_cli_bad_config_exits_one(tmp_path, cli_env):
    cfg_file = tmp_path / "bad.cfg"
    cfg_file.write_text("state = bogus\n")
    out = tmp_path / "unused.csv"
    proc = _cli(["sweep", "--config", str(cfg_file), "--out", str(out)], cli_env)
    assert proc.returncode == 1
    assert proc.stderr.startswith("error:")
    assert "state" in proc.stderr


def test_cli_accept_failure_exits_two(cli_env):
    # an impossible tolerance turns the first target red
    proc = _cli(
        [
            "accept",
            "coherent-negativity",
            "--set",
            "accept.mu_tol=1e-12",
        ],
        cli_env,
    )
    assert proc.returncode == 2
    assert "[FAIL] coherent-negativity" in proc.stdout
    assert "0/1 targets passed" in proc.stdout


def test_cli_unknown_target_rejected(cli_env):
    proc = _cli(["accept", "nonsense-target"], cli_env)
    assert proc.returncode != 0
