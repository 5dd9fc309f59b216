import json

import numpy as np
import pytest

from qftkit import cli
from qftkit.netlist import decode as decode_netlist
from qftkit.qft_pow2 import standard_qft
from qftkit.sim import dft_reference


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def qft3_path(tmp_path, capsys):
    path = tmp_path / "qft3.qc"
    code, _, _ = run_cli(capsys, "build", "--kind", "standard", "--n", "3", "--out", str(path))
    assert code == 0
    return str(path)


class TestBuild:
    def test_stdout_netlist_decodes(self, capsys):
        code, out, _ = run_cli(capsys, "build", "--kind", "standard", "--n", "3")
        assert code == 0
        assert decode_netlist(out) == standard_qft(3)

    def test_kind_specific_flags_required(self, capsys):
        code, _, err = run_cli(capsys, "build", "--kind", "banded", "--n", "6")
        assert code == 2
        assert "band" in err
        code, _, err = run_cli(capsys, "build", "--kind", "logdepth", "--n", "3")
        assert code == 2
        assert "--k" in err

    def test_banded_build(self, tmp_path, capsys):
        path = tmp_path / "b.qc"
        code, _, _ = run_cli(
            capsys, "build", "--kind", "banded", "--n", "6", "--band", "3", "--out", str(path)
        )
        assert code == 0
        circ = decode_netlist(path.read_text())
        assert circ.metadata["b"] == 3


class TestStats:
    def test_json_payload_is_frozen(self, qft3_path, capsys):
        code, out, _ = run_cli(capsys, "stats", qft3_path, "--json")
        assert code == 0
        payload = json.loads(out)
        assert list(payload) == [
            "n",
            "size",
            "depth",
            "width",
            "gate_histogram",
            "error_bound",
            "measured_error",
            "seed",
        ]
        assert payload["n"] == 3
        assert payload["size"] == 6
        assert payload["depth"] <= 5
        assert payload["gate_histogram"] == {"h": 3, "cp": 3}

    def test_human_output_lists_every_key(self, qft3_path, capsys):
        code, out, _ = run_cli(capsys, "stats", qft3_path)
        assert code == 0
        lines = out.strip().splitlines()
        assert [l.split(":")[0] for l in lines] == list(cli.STATS_KEYS)
        assert "size: 6" in lines

    def test_missing_file_is_a_usage_error(self, capsys):
        code, _, err = run_cli(capsys, "stats", "/nonexistent/path.qc")
        assert code == 2
        assert "error" in err


class TestSim:
    def test_amplitudes_match_the_transform_column(self, qft3_path, capsys):
        code, out, _ = run_cli(capsys, "sim", qft3_path, "--input", "101")
        assert code == 0
        lines = out.strip().splitlines()
        assert len(lines) == 8
        got = np.zeros(8, dtype=complex)
        for line in lines:
            bits, re, im = line.split()
            got[int(bits, 2)] = float(re) + 1j * float(im)
        assert np.abs(got - dft_reference(8)[:, 5]).max() < 1e-9

    def test_shot_counts_are_seeded_json(self, qft3_path, capsys):
        code, out, _ = run_cli(capsys, "sim", qft3_path, "--input", "000", "--shots", "200", "--seed", "4")
        assert code == 0
        payload = json.loads(out)
        assert list(payload) == ["shots", "seed", "counts"]
        assert payload["shots"] == 200
        assert payload["seed"] == 4
        assert sum(payload["counts"].values()) == 200
        again = json.loads(run_cli(capsys, "sim", qft3_path, "--input", "000", "--shots", "200", "--seed", "4")[1])
        assert again == payload

    def test_input_validation(self, qft3_path, capsys):
        assert run_cli(capsys, "sim", qft3_path, "--input", "10")[0] == 2
        assert run_cli(capsys, "sim", qft3_path, "--input", "10x")[0] == 2
        assert run_cli(capsys, "sim", qft3_path, "--input", "101", "--shots", "0")[0] == 2


class TestSeedResolution:
    def test_environment_seed_is_honored(self, qft3_path, capsys, monkeypatch):
        monkeypatch.setenv("QFTKIT_SEED", "123")
        payload = json.loads(
            run_cli(capsys, "sim", qft3_path, "--input", "000", "--shots", "10")[1]
        )
        assert payload["seed"] == 123

    def test_flag_beats_environment(self, qft3_path, capsys, monkeypatch):
        monkeypatch.setenv("QFTKIT_SEED", "123")
        payload = json.loads(
            run_cli(capsys, "sim", qft3_path, "--input", "000", "--shots", "10", "--seed", "9")[1]
        )
        assert payload["seed"] == 9

    def test_garbage_environment_seed_rejected(self, qft3_path, capsys, monkeypatch):
        monkeypatch.setenv("QFTKIT_SEED", "abc")
        code, _, err = run_cli(capsys, "sim", qft3_path, "--input", "000", "--shots", "10")
        assert code == 2
        assert "QFTKIT_SEED" in err


class TestVerify:
    def test_bounds_suite_prints_the_three_constants(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--suite", "bounds")
        assert code == 0
        assert "0.6366" in out
        assert "0.7711" in out
        assert "0.8535" in out

    def test_unitary_suite_small_cap(self, capsys):
        assert run_cli(capsys, "verify", "--suite", "unitary", "--n", "3")[0] == 0

    def test_cap_validation(self, capsys):
        assert run_cli(capsys, "verify", "--suite", "unitary", "--n", "12")[0] == 2

    def test_unknown_suite_is_an_argparse_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["verify", "--suite", "nope"])
        assert exc.value.code == 2


class TestFactor:
    def test_factors_fifteen(self, capsys):
        code, out, _ = run_cli(capsys, "factor", "15", "--seed", "5")
        assert code == 0
        payload = json.loads(out)
        assert payload["divisor"] in (3, 5)
        assert set(payload) >= {"divisor", "attempts", "trace"}

    def test_even_screen(self, capsys):
        code, out, _ = run_cli(capsys, "factor", "16")
        assert code == 0
        assert json.loads(out)["divisor"] == 2

    def test_prime_input_is_a_usage_error(self, capsys):
        code, _, err = run_cli(capsys, "factor", "13")
        assert code == 2
        assert "prime" in err


class TestAccept:
    def test_quick_battery_passes(self, capsys):
        code, out, _ = run_cli(capsys, "accept", "--quick")
        assert code == 0
        lines = out.strip().splitlines()
        assert len(lines) == 8
        assert all(line.startswith("PASS criterion") for line in lines)
