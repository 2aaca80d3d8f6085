import csv
import io
import json
import math

import pytest

from ringmod import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def config_line(text):
    return next(line for line in text.splitlines() if line.startswith("# config: "))


class TestParsing:
    @pytest.mark.parametrize("text,value", [("5e9", 5e9), ("5G", 5e9), ("2.5GHz", 2.5e9), ("300k", 3e5), ("2p", 2e-12)])
    def test_si(self, text, value):
        assert cli.parse_si(text) == pytest.approx(value)

    def test_sweep_tokens(self):
        got = cli._parse_sweep(["frequency", "1G..100G", "points=7", "spacing=log"])
        assert got == {"sweep_axis": "frequency", "sweep_start": 1e9, "sweep_stop": 1e11, "sweep_points": 7,
                       "sweep_spacing": "log"}

    def test_int_ranges(self):
        assert cli._parse_int_range("-2..2") == [-2, -1, 0, 1, 2]
        assert cli._parse_int_range("1,3") == [1, 3]


class TestRun:
    def test_row_count_and_columns(self, capsys):
        code, out, err = run(capsys, "run", "--device", "fmmr", "--preset", "paper", "--sweep", "frequency",
                             "1e9..100e9", "points=100", "--workers", "1")
        assert code == 0
        table = rows(out)
        assert len(table) == 100
        assert list(table[0]) == ["sweep_value", "abs_d[-2]", "arg_d[-2]", "abs_d[-1]", "arg_d[-1]", "abs_d[0]",
                                  "arg_d[0]", "abs_d[1]", "arg_d[1]", "abs_d[2]", "arg_d[2]", "I0", "h1_db",
                                  "h2_db", "h3_db", "convergence_ok"]
        assert all(r["convergence_ok"] == "true" for r in table)
        assert "rows=100" in err and "order=24" in err

    def test_mzi_flat(self, capsys):
        _, out, _ = run(capsys, "run", "--device", "mzi", "--sweep", "frequency", "1G..500G", "points=25")
        assert len({r["h1_db"] for r in rows(out)}) == 1

    def test_cmmr_h2_above_h3(self, capsys):
        _, out, _ = run(capsys, "run", "--device", "cmmr", "--preset", "paper", "--bias", "0.12", "--sweep",
                        "frequency", "5G..200G", "points=40")
        assert all(float(r["h2_db"]) > float(r["h3_db"]) for r in rows(out))

    def test_deterministic_across_workers(self, capsys):
        argv = ["run", "--device", "dcmmr", "--sweep", "bias", "0.05..0.4", "points=30"]
        _, a, _ = run(capsys, *argv, "--workers", "1")
        _, b, _ = run(capsys, *argv, "--workers", "8")
        _, c, _ = run(capsys, *argv, "--workers", "8")
        assert a.replace('"workers":1', '"workers":8') == b == c

    def test_config_round_trip(self, capsys, tmp_path):
        _, first, _ = run(capsys, "run", "--device", "fmmr", "--fsr", "400G", "--rho", "0.95", "--bias", "-0.05",
                          "--sweep", "drive", "1e-3..0.3", "points=12", "spacing=log", "--sidebands=-1..1")
        cfg = tmp_path / "cfg.json"
        cfg.write_text(config_line(first)[len("# config: "):])
        _, second, _ = run(capsys, "run", "--config", str(cfg))
        assert second == first
        # a CSV produced by the tool is itself accepted as config
        csv_file = tmp_path / "out.csv"
        csv_file.write_text(first)
        _, third, _ = run(capsys, "run", "--config", str(csv_file))
        assert third == first

    def test_flags_override_file(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"device": "cmmr", "bias": 0.3, "sweep_points": 3}))
        _, out, _ = run(capsys, "run", "--config", str(cfg), "--bias", "0.2")
        resolved = json.loads(config_line(out)[len("# config: "):])
        assert resolved["bias"] == 0.2 and resolved["sweep_points"] == 3

    def test_resolved_config_is_explicit(self, capsys):
        _, out, _ = run(capsys, "run", "--device", "cmmr", "--fsr", "250G", "--sweep", "frequency", "5G", "points=1")
        resolved = json.loads(config_line(out)[len("# config: "):])
        assert resolved["td"] == pytest.approx(4e-12) and resolved["fsr"] is None
        assert resolved["alpha"] == 0.98 and resolved["beta"] == 0.0942 and resolved["bias"] == 0.12

    def test_output_file(self, capsys, tmp_path):
        path = tmp_path / "out.csv"
        code, out, _ = run(capsys, "run", "--device", "mzi", "--sweep", "drive", "0.01..0.1", "points=3",
                           "--output", str(path))
        assert code == 0 and out == "" and len(rows(path.read_text())) == 3

    def test_oracle_check(self, capsys):
        code, _, err = run(capsys, "run", "--device", "cmmr", "--sweep", "frequency", "5G..100G", "points=3",
                           "--oracle-check")
        assert code == 0 and "oracle_max_rel_err=" in err

    def test_order_raised_when_needed(self, capsys):
        code, out, err = run(capsys, "run", "--device", "fmmr", "--order", "2", "--strict", "--sidebands", "0",
                             "--sweep", "drive", "0.1..1", "points=3")
        assert code == 0 and "order=2" not in err
        assert "# convergence: window order" in out

    def test_convergence_failure_strict(self, capsys, monkeypatch):
        monkeypatch.setattr(cli, "MAX_ORDER", 4)
        argv = ["run", "--device", "fmmr", "--order", "2", "--sidebands", "0", "--sweep", "drive", "0.5..1",
                "points=3"]
        code, out, _ = run(capsys, *argv)
        assert code == 0 and all(r["convergence_ok"] == "false" for r in rows(out))
        code, _, _ = run(capsys, *argv, "--strict")
        assert code == cli.EXIT_CONVERGENCE


class TestExitCodes:
    def test_td_fsr_exclusive(self, capsys):
        code, _, err = run(capsys, "run", "--td", "2p", "--fsr", "500G")
        assert code == 2 and "mutually exclusive" in err

    @pytest.mark.parametrize("argv", [
        ["run", "--alpha", "1.5", "--sweep", "frequency", "5G", "points=1"],
        ["run", "--sweep", "frequency", "5G..1G", "points=3"],
        ["run", "--sweep", "phase", "0..1"],
        ["run", "--device", "mzi", "--rho", "0.5", "--sweep", "drive", "0.1", "points=1"],
        ["run", "--device", "laser"],
        ["run", "--config", "/nonexistent/cfg.json"],
    ])
    def test_config_errors(self, capsys, argv):
        assert run(capsys, *argv)[0] == 2

    def test_solver_error(self, capsys):
        code, _, err = run(capsys, "run", "--device", "cmmr", "--alpha", "1", "--bias", "0", "--beta", "0",
                           "--sweep", "frequency", "5G", "points=1")
        assert code == 3 and "singular" in err

    def test_unknown_figure(self, capsys):
        code, _, err = run(capsys, "repro", "fig9")
        assert code == 2 and "fig2a" in err and "fig8" in err


class TestRepro:
    @pytest.mark.parametrize("fig", cli.FIGURES)
    def test_headers_document_axes(self, capsys, fig):
        code, out, _ = run(capsys, "repro", fig)
        assert code == 0
        first = out.splitlines()[0]
        assert first.startswith(f"# figure: {fig}:") and "rad" in first or "Hz" in first
        assert len(rows(out)) > 0

    def test_fig3_columns(self, capsys):
        _, out, _ = run(capsys, "repro", "fig3")
        table = rows(out)
        assert {"h1_db", "h2_db"} <= set(table[0]) and len(table) == 100

    def test_fig5_two_biases(self, capsys):
        _, out, _ = run(capsys, "repro", "fig5")
        assert {r["series"] for r in rows(out)} == {"bias=0.15", f"bias={cli.FIG5_SECOND_BIAS:g}"}
        assert "chosen assumption" in out.splitlines()[0]

    def test_fig8_devices(self, capsys):
        _, out, _ = run(capsys, "repro", "fig8")
        table = rows(out)
        assert {r["series"] for r in table} == {"cmmr", "dcmmr", "mzi"}
        assert "100 GHz" in out.splitlines()[0]


class TestVerify:
    @pytest.mark.parametrize("device", ["fmmr", "cmmr", "dcmmr", "mzi"])
    def test_paper_preset(self, capsys, device):
        code, out, _ = run(capsys, "verify", device, "paper")
        assert code == 0
        assert "[PASS] oracle equivalence" in out and "[FAIL]" not in out

    def test_lossless(self, capsys):
        code, out, _ = run(capsys, "verify", "cmmr", "lossless-unitarity")
        assert code == 0 and "[PASS] preset output power" in out

    def test_dcmmr_cancellation_reported(self, capsys):
        _, out, _ = run(capsys, "verify", "dcmmr")
        assert "[PASS] second-order field cancellation" in out

    def test_cmmr_sensitivity_sweep_reported(self, capsys):
        _, out, _ = run(capsys, "verify", "cmmr")
        for bias in ("0.10", "0.12", "0.14", "0.16"):
            assert f"ip3 sensitivity bias={bias}" in out

    def test_failure_exit(self, capsys, monkeypatch):
        monkeypatch.setattr(cli, "ORACLE_TOL", 0.0)
        code, _, err = run(capsys, "verify", "mzi")
        assert code == cli.EXIT_VERIFY and "oracle equivalence" in err


class TestBetaFromVoltage:
    def test_half_wave(self, capsys):
        code, out, _ = run(capsys, "beta-from-voltage", "4", "4", "1")
        assert code == 0 and float(out) == pytest.approx(math.pi)

    def test_zero(self, capsys):
        assert float(run(capsys, "beta-from-voltage", "0", "4", "0.03")[1]) == 0.0

    def test_literal_convention(self, capsys):
        _, out, err = run(capsys, "beta-from-voltage", "2.1", "4", "0.03", "--paper-beta-convention")
        assert float(out) == pytest.approx(0.01575)
        assert "0.0494801" in err and "0.01575" in err

    def test_bad_input(self, capsys):
        assert run(capsys, "beta-from-voltage", "1", "0", "0.03")[0] == 2
