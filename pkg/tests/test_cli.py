import json
import subprocess
import sys

import pytest

from gwcantor.cli import COMMANDS, RunConfig, UsageError, build_parser, parse_budget, parse_config, run


def call(argv, capsys):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_extinction_prints_exact_half(capsys):
    code, out, _ = call(["extinction", "--gamma", "log2(3/2)"], capsys)
    assert code == 0 and out == "1/2\n"


def test_verify_psi_passes(capsys):
    code, out, _ = call(["verify-psi", "--gamma", "log2(3/2)", "--depth", "2"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["pass"] and doc["schema_version"] == 1
    assert all(r["equal"] for r in doc["rows"]) and len(doc["rows"]) == 5


def test_bernoulli_interval_json(capsys):
    code, out, _ = call(["bernoulli-interval", "--gamma", "log2(3/2)"], capsys)
    doc = json.loads(out)
    assert code == 0 and abs(doc["p_lo"] - 0.140276506997464) < 1e-9


def test_usage_errors_exit_2_with_one_line(capsys):
    for argv in (
        ["extinction", "--gamma", "0.3", "--mode", "exact"],
        ["extinction", "--gamma", "1.5"],
        ["nonsense"],
        ["extinction", "--depth", "x"],
        ["m-schedule", "--workers", "0"],
        ["energy", "--measure", "cauchy"],
        ["verify-psi", "--depth", "9"],
    ):
        code, out, err = call(argv, capsys)
        assert code == 2, argv
        assert err.count("\n") == 1 and "error" in err


def test_failing_check_exits_1(capsys, tmp_path):
    bad = tmp_path / "log.txt"
    bad.write_text("00\n10\n00\n")
    code, out, _ = call(["fce-cover", "--f", "1", "--snapshots", str(bad)], capsys)
    assert code == 1 and "flips" in json.loads(out)["error"]


def test_every_subcommand_has_help():
    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "subcommand")
    assert set(sub.choices) == set(COMMANDS)
    for name, p in sub.choices.items():
        text = p.format_help()
        assert COMMANDS[name][1].split()[0] in text
        for flag in ("--gamma", "--depth", "--seed", "--replicates", "--workers", "--format", "--out"):
            assert flag in text


def test_run_config_round_trip():
    cfg = parse_config(["xn-check", "--seed", "5", "--depth", "12", "--n", "1-3"])
    again = RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg
    assert "workers" not in cfg.echo()


def test_exact_mode_rejects_float_gamma():
    with pytest.raises(UsageError):
        parse_config(["extinction", "--gamma", "0.25", "--mode", "exact"]).survival_params()


def test_float_mode(capsys):
    code, out, _ = call(["extinction", "--gamma", "log2(3/2)", "--mode", "float"], capsys)
    assert out == "0.5\n"


def test_energy_csv(capsys):
    code, out, _ = call(["energy", "--measure", "uniform", "--gamma", "0", "--depth", "3"], capsys)
    assert out == "D,partial_sum,increment\n1,0.5,0.5\n2,0.75,0.25\n3,0.875,0.125\n"
    assert "\r" not in out


def test_csv_quoting(capsys):
    code, out, _ = call(["verify-psi", "--depth", "2", "--format", "csv"], capsys)
    lines = out.splitlines()
    assert lines[0] == "T,T_prime,lhs,rhs,equal"
    assert '"[""e"",""0""]"' in out


def test_budget_parser():
    assert parse_budget("n")(5) == 5
    assert parse_budget("2*n**2")(3) == 18
    assert parse_budget("4")(100) == 4
    with pytest.raises(UsageError):
        parse_budget("log n")


@pytest.mark.parametrize(
    "argv",
    [
        ["sample-gw", "--depth", "4", "--replicates", "3", "--seed", "9"],
        ["sample-florida", "--depth", "4", "--replicates", "3"],
        ["sample-subcritical", "--depth", "4", "--replicates", "3"],
        ["sample-gw", "--check", "--depth", "6", "--replicates", "5000"],
        ["sample-florida", "--check", "--depth", "3", "--replicates", "5000"],
        ["sample-subcritical", "--check", "--replicates", "5000"],
        ["child-dist"],
        ["measure-table", "--depth", "2", "--horizon", "6"],
        ["overlay-sample", "--depth", "2", "--replicates", "5000"],
        ["weight", "--set", "e,0,01"],
        ["hitting-check", "--random-sets", "5", "--replicates", "2000"],
        ["m-schedule", "--n", "0-3", "--ell", "0-2"],
        ["xn-check", "--n", "1-3", "--depth", "10", "--replicates", "2000"],
        ["fce-cover"],
        ["energy", "--measure", "tz:3,2", "--depth", "12"],
        ["hope", "--epsilon", "0.5", "--terms", "2000"],
        ["hope", "--terms", "50"],
        ["tz", "--q", "4", "--r", "3", "--m", "3"],
        ["bernoulli-entropy", "--p", "2/3"],
    ],
)
def test_subcommands_run_and_are_deterministic(argv, tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(argv + ["--out", str(a), "--workers", "1"]) == 0
    assert run(argv + ["--out", str(b), "--workers", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "gwcantor", "extinction", "--gamma", "log2(4/3)"],
        capture_output=True, text=True, check=True,
    )
    assert res.stdout == "1/3\n"


def test_sample_listing_streams_json_lines(capsys):
    code, out, _ = call(["sample-gw", "--depth", "3", "--replicates", "4", "--seed", "1"], capsys)
    lines = out.splitlines()
    assert code == 0 and len(lines) == 4
    assert [json.loads(x)["replicate"] for x in lines] == [0, 1, 2, 3]
