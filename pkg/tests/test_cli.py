import csv
import math

import pytest

from dcfcap.cli import main
from dcfcap.config import KEYS, ConfigError, parse_config, with_values
from dcfcap.figures import (RECIPES, emit_csv, figure, figure_columns, grid, render_csv, sweep)
from dcfcap.params import MacParams


def test_defaults_are_table_values():
    cfg = parse_config("")
    assert cfg.mac == MacParams()
    assert (cfg.mac.w0, cfg.mac.m) == (32, 5)
    assert cfg.mac.payload_bytes == 1024 and cfg.mac.slot_us == 20
    assert cfg.channel.capture.spreading_factor == 11


def test_db_conversion():
    cfg = parse_config("sinr_db = 7\ncapture_db = 6 # comment\n")
    assert cfg.channel.sinr == pytest.approx(5.011872336272722)
    assert cfg.channel.capture.z0 == pytest.approx(3.981071705534972)
    assert cfg.values["sinr_db"] == 7


def test_precedence():
    cfg = parse_config("n = 4\npayload_bytes = 512\n", ["n=8"])
    assert cfg.n == 8
    assert cfg.mac.payload_bytes == 512


@pytest.mark.parametrize("text,fragment", [
    ("w0 = 0", "w0"),
    ("bogus = 1", "unknown key"),
    ("n 5", "malformed"),
    ("n = five", "n:"),
    ("data_rate_mbps = 54", "data_rate_mbps"),
    ("nak_bytes = 20", "nak_bytes"),
    ("capture_then_error = maybe", "boolean"),
])
def test_config_errors(text, fragment):
    with pytest.raises(ConfigError) as info:
        parse_config("# header\n" + text)
    assert fragment in str(info.value)


def test_error_carries_line_number():
    with pytest.raises(ConfigError) as info:
        parse_config("n = 3\n\nw0 = 0\n")
    assert info.value.line == 3
    assert "config:3" in str(info.value)


def test_with_values_reconverts():
    cfg = with_values(parse_config(""), sinr_db=10.0)
    assert cfg.channel.sinr == pytest.approx(10.0)


def test_grid():
    assert len(grid(2, 50, 2, integer=True)) == 25
    assert grid(0, 1, 0.25) == [0, 0.25, 0.5, 0.75, 1.0]


def test_csv_rendering(tmp_path):
    text = render_csv(["a", "b"], [[1, 1 / 3], [2, math.inf]])
    assert text == "a,b\n1,0.333333333\n2,inf\n"
    path = emit_csv(["a"], [[0.1]], tmp_path / "x.csv")
    assert path.read_bytes() == b"a\n0.1\n"
    with pytest.raises(ValueError):
        render_csv(["a", "b"], [[1]])


def test_figure_schemas():
    assert figure_columns(RECIPES["fig3"]) == ["sinr_db", "tau_model", "tau_bianchi"]
    assert figure_columns(RECIPES["fig3"], True) == ["sinr_db", "tau_model", "tau_bianchi", "tau_sim"]
    assert figure_columns(RECIPES["fig5"]) == ["sinr_db", "s_z0_1db", "s_z0_10db", "s_z0_30db", "s_bianchi"]
    assert figure_columns(RECIPES["fig4"]) == ["n", "s_model", "s_bianchi"]


def test_figure_recipes_follow_captions():
    fixed = {k: dict(r.fixed) for k, r in RECIPES.items()}
    assert fixed["fig3"] == {"capture_db": 6.0, "n": 10, "payload_bytes": 1024}
    assert fixed["fig4"]["sinr_db"] == 7.0 and fixed["fig4"]["capture_db"] == 6.0
    assert fixed["fig5"]["n"] == 5 and fixed["fig6"]["n"] == 5 and fixed["fig7"]["n"] == 2


def test_fig4_grid():
    cols, rows = figure("fig4", parse_config("", mode="figures"))
    assert len(rows) == 25
    assert [r[0] for r in rows] == list(range(2, 51, 2))


def test_fig3_tau_non_decreasing():
    cols, rows = figure("fig3", parse_config("", mode="figures"))
    tau = [r[1] for r in rows]
    assert all(b >= a for a, b in zip(tau, tau[1:]))
    assert len({r[2] for r in rows}) == 1  # Bianchi baseline is flat


def test_fig7_capture_helps():
    cols, rows = figure("fig7", parse_config("", mode="figures"))
    assert all(r[1] >= r[2] for r in rows)


def test_figure_with_simulation_columns():
    cfg = parse_config("slots = 200000", mode="figures")
    cols, rows = figure("fig4", cfg, with_sim=True)
    assert cols == ["n", "s_model", "s_bianchi", "s_sim"]
    for n, model, _, sim in rows[:5]:
        assert sim == pytest.approx(model, rel=0.05)


def test_sweep_axes():
    cfg = parse_config("sweep_axis = stations\nsweep_start = 1\nsweep_stop = 4\nsweep_step = 1\n"
                       "sinr_db = 10\ncapture_db = 6", mode="sweep")
    cols, rows = sweep(cfg)
    assert cols[0] == "stations" and [r[0] for r in rows] == [1, 2, 3, 4]
    cfg = parse_config("sweep_axis = payload_bytes\nsweep_start = 128\nsweep_stop = 1024\n"
                       "sweep_step = 896\nsinr_db = 8", mode="sweep")
    cols, rows = sweep(cfg)
    s = cols.index("s")
    assert [r[0] for r in rows] == [128, 1024]
    assert rows[0][s] > 0 and rows[1][s] > 0


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_cli_figures_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["figures", "fig3", "--out", str(a)]) == 0
    assert main(["figures", "fig3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert _read(a)[0] == ["sinr_db", "tau_model", "tau_bianchi"]


def test_cli_gnuplot_script(tmp_path):
    out = tmp_path / "fig7.csv"
    assert main(["figures", "fig7", "--out", str(out), "--gnuplot-script"]) == 0
    script = out.with_suffix(".gp").read_text()
    assert "fig7.csv" in script and "using 1:3" in script


def test_cli_solve_and_simulate(tmp_path, capsys):
    out = tmp_path / "solve.csv"
    assert main(["solve", "--set", "sinr_db=7", "--set", "capture_db=6", "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "tau = " in printed
    assert _read(out)[0][0] == "tau"
    assert main(["simulate", "--set", "n=3", "--slots", "20000", "--replications", "2"]) == 0
    assert "s_sim_se" in capsys.readouterr().out


def test_cli_sweep_with_config_file(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("sweep_axis = capture_db\nsweep_start = 0\nsweep_stop = 30\nsweep_step = 10\n"
                    "sinr_db = 12\nn = 5\n")
    out = tmp_path / "s.csv"
    assert main(["sweep", "--config", str(conf), "--out", str(out), "--sim", "--slots", "50000"]) == 0
    rows = _read(out)
    assert rows[0][0] == "capture_db" and "s_sim" in rows[0]
    assert len(rows) == 5


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["solve", "--set", "w0=0"]) == 1
    assert "w0" in capsys.readouterr().err
    assert main(["solve", "--config", str(tmp_path / "missing.conf")]) == 1
    assert main(["solve", "--set", "n=1", "--set", "sinr_db=-10", "--set", "m=3"]) == 2
    assert main(["figures", "fig3", "--out", str(tmp_path / "no" / "dir" / "x.csv")]) == 3
    with pytest.raises(SystemExit) as info:
        main(["figures", "fig9"])
    assert info.value.code == 1


def test_cli_solver_failures_listed(tmp_path, capsys):
    code = main(["sweep", "--set", "sweep_axis=stations", "--set", "sweep_start=1",
                 "--set", "sweep_stop=3", "--set", "sinr_db=-10", "--out", str(tmp_path / "x.csv")])
    assert code == 2
    err = capsys.readouterr().err
    assert "stations=1" in err and "stations=2" in err and "stations=3" in err


def test_help_lists_every_key_with_units(capsys):
    with pytest.raises(SystemExit):
        main(["solve", "--help"])
    out = capsys.readouterr().out
    for key in KEYS:
        assert key in out
    assert "[dB]" in out and "[bytes]" in out and "[us]" in out


def test_parallel_sweep_preserves_order():
    cfg = parse_config("sweep_axis = stations\nsweep_start = 2\nsweep_stop = 8\nsweep_step = 2\n"
                       "sinr_db = 9\ncapture_db = 6\nworkers = 2", mode="sweep")
    cols, rows = sweep(cfg)
    serial = sweep(with_values(cfg, workers=1))[1]
    assert rows == serial
