import csv
import io
import subprocess
import sys

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bicmlab.cli import ConfigError, RunSpec, dump_config, load_config, main, parse_rates, render_csv, run_spec
from bicmlab.constellation import by_name, save_constellation

FAST = ["--samples", "2000", "--seed", "3"]


def _run(tmp_path, *argv, name="out.csv"):
    out = tmp_path / name
    assert main([*argv, "--out", str(out)]) == 0
    return out


def _table(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


class TestRates:
    def test_inclusive_range(self):
        r = parse_rates("0.1:0.1:3.9")
        assert len(r) == 39 and r[0] == 0.1 and r[-1] == 3.9 and r[2] == 0.3

    def test_list(self):
        assert parse_rates("0.5, 1,2") == (0.5, 1.0, 2.0)

    @pytest.mark.parametrize("text", ["0:0.3:1", "0:0:1", "1:0.1:0", "a:b:c", "0:1", "1,x"])
    def test_malformed(self, text):
        with pytest.raises(ConfigError):
            parse_rates(text)

    def test_not_increasing(self):
        with pytest.raises(ConfigError):
            RunSpec("exponent", rates=(1.0, 0.5))


class TestConfig:
    def test_empty_file_and_flags(self, tmp_path):
        cfg = tmp_path / "empty.cfg"
        cfg.write_text("")
        spec = load_config(cfg, {"command": "capacity", "snr_db": (3.0,), "constellation": "psk8"})
        assert spec == RunSpec("capacity", constellation="psk8", snr_db=(3.0,))

    def test_flags_win(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("command = capacity\nsnr_db = 5\n")
        assert load_config(cfg, {"snr_db": (15.0,)}).snr_db == (15.0,)
        assert load_config(cfg).snr_db == (5.0,)

    @pytest.mark.parametrize(
        "body,line",
        [
            ("command = gmi\nsnr_db 5\n", 2),
            ("command = gmi\n\nbogus = 1\n", 3),
            ("command = gmi\nsamples = many\n", 2),
            ("command = gmi\nseed = 1\nseed = 2\n", 3),
        ],
    )
    def test_errors_carry_line_numbers(self, tmp_path, body, line):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text(body)
        with pytest.raises(ConfigError, match=f":{line}:"):
            load_config(cfg)

    def test_seed_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("BICMLAB_SEED", "77")
        cfg = tmp_path / "c.cfg"
        cfg.write_text("command = gmi\n")
        assert load_config(cfg).seed == 77
        assert load_config(cfg, {"seed": 5}).seed == 5

    @given(
        command=st.sampled_from(["capacity", "gmi", "exponent", "cutoff", "validate"]),
        snr=st.lists(st.floats(-40, 40, allow_nan=False), min_size=1, max_size=3),
        rates=st.lists(st.floats(0, 8, allow_nan=False), min_size=1, max_size=5, unique=True),
        seed=st.integers(0, 2**64 - 1),
        samples=st.integers(1000, 10**7),
        extrinsic=st.sampled_from(["none", "perfect", "gaussian:1.5", "gaussian:0.5/2"]),
        rate=st.floats(0, 4, allow_nan=False),
    )
    def test_dump_reload_roundtrip(self, tmp_path, command, snr, rates, seed, samples, extrinsic, rate):
        spec = RunSpec(
            command,
            snr_db=tuple(snr),
            rates=tuple(sorted({round(r, 10) for r in rates})),
            seed=seed,
            samples=samples,
            extrinsic=extrinsic,
            rate=rate,
            metrics=("matched", "ext-hyp"),
            families=("cm", "maxlog-coupled", "sum-s0.5"),
        )
        cfg = tmp_path / "dump.cfg"
        cfg.write_text("\n".join(dump_config(spec)) + "\n")
        assert load_config(cfg) == spec


class TestCommands:
    def test_capacity_rows(self, tmp_path):
        out = _run(tmp_path, "capacity", "--constellation", "psk8", "--channel", "awgn", "--snr-db", "5", *FAST)
        rows = _table(out)
        assert [r["measure"] for r in rows] == ["cm", "bicm"]
        assert float(rows[1]["value_bits"]) <= float(rows[0]["value_bits"]) + 3 * float(rows[0]["std_error"])

    def test_exponent_grid_is_exact(self, tmp_path):
        out = _run(
            tmp_path, "exponent", "--constellation", "qam16", "--channel", "rayleigh", "--snr-db", "5,15",
            "--families", "cm,ind,sum,maxlog,maxlog-coupled", "--rates", "0.1:0.1:0.5", *FAST,
        )
        rows = _table(out)
        assert len(rows) == 2 * 5 * 5
        assert sorted({r["R_bits"] for r in rows}) == ["0.1", "0.2", "0.3", "0.4", "0.5"]
        assert {r["snr_db"] for r in rows} == {"5.0", "15.0"}
        assert list(rows[0]) == [
            "family", "constellation", "labeling", "channel", "snr_db", "R_bits", "Er_nats", "rho_opt", "s_opt", "std_error", "converged",
        ]

    def test_cutoff_and_gmi(self, tmp_path):
        rows = _table(_run(tmp_path, "cutoff", "--constellation", "qam16", "--channel", "rayleigh", *FAST))
        assert [r["quantity"] for r in rows] == ["R0_cm", "R0_q", "R0_q", "R0_ind", "R0_av"]
        rows = _table(_run(tmp_path, "gmi", "--metrics", "sum,maxlog,ext-tx,ext-hyp", "--extrinsic", "perfect", *FAST, name="g.csv"))
        assert [r["measure"] for r in rows] == ["gmi", "gmi", "pseudo_gmi", "gmi"]

    def test_validate(self, tmp_path):
        out = _run(tmp_path, "validate", "--constellation", "qpsk", "--snr-db", "10", "--N", "4", "--rate", "0.5", "--trials", "3000", *FAST)
        (row,) = _table(out)
        assert row["metric"] == "matched" and int(row["trials"]) == 3000
        assert float(row["Pe_hat"]) <= float(row["bound"]) + float(row["ci_halfwidth"])

    def test_constellation_file(self, tmp_path):
        c, l = by_name("psk8")
        path = tmp_path / "ring8.txt"
        save_constellation(path, c, l)
        rows = _table(_run(tmp_path, "capacity", "--constellation", str(path), "--labeling", "file", *FAST))
        ref = _table(_run(tmp_path, "capacity", "--constellation", "psk8", *FAST, name="ref.csv"))
        assert rows[0]["value_bits"] == ref[0]["value_bits"]

    @pytest.mark.parametrize(
        "argv",
        [
            ["capacity", "--constellation", "qam17"],
            ["gmi", "--metrics", "exact"],
            ["exponent", "--families", "cm,lm", "--rates", "0,1"],
            ["exponent"],
            ["gmi", "--extrinsic", "gaussian"],
            ["capacity", "--labeling", "antigray"],
            ["cutoff", "--metrics", "matched"],
            ["bogus"],
            [],
        ],
    )
    def test_usage_errors_exit_2(self, argv, capsys):
        with pytest.raises(SystemExit) as exc:
            main(argv + FAST)
        assert exc.value.code == 2
        assert "error" in capsys.readouterr().err


class TestDeterminism:
    @pytest.mark.parametrize(
        "argv",
        [
            ["capacity", "--snr-db", "0,5"],
            ["gmi", "--metrics", "sum,ext-hyp", "--extrinsic", "gaussian:1.0"],
            ["exponent", "--families", "cm,sum,ext-tx", "--extrinsic", "perfect", "--rates", "0:0.5:1.5"],
            ["cutoff", "--channel", "rayleigh"],
            ["validate", "--constellation", "qpsk", "--metrics", "matched,maxlog", "--trials", "2000"],
        ],
        ids=lambda a: a[0],
    )
    def test_regenerates_from_header(self, tmp_path, argv):
        first = _run(tmp_path, *argv, *FAST, name="first.csv")
        second = _run(tmp_path, "--config", str(first), name="second.csv")
        assert first.read_bytes() == second.read_bytes()

    def test_header_records_version_and_config(self, tmp_path):
        text = _run(tmp_path, "capacity", *FAST).read_text()
        assert text.startswith("# bicmlab ")
        for key in ("seed = 3", "samples = 2000", "backend = monte_carlo", "nodes = 32"):
            assert f"# {key}\n" in text

    def test_render_is_pure(self):
        spec = RunSpec("capacity", samples=2000, constellation="qpsk")
        cols, rows = run_spec(spec)
        assert render_csv(spec, cols, rows) == render_csv(spec, *run_spec(spec))


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "bicmlab", "capacity", "--constellation", "bpsk", "--samples", "1000", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert _table(out)[0]["measure"] == "cm"
