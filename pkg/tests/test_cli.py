import json

from wsawlab import cli


def run_cli(argv, tmp_path, name="report.json"):
    out = tmp_path / name
    code = cli.main(argv + ["--out", str(out)])
    text = out.read_text() if out.exists() else ""
    return code, text


def test_green_json_contract(tmp_path):
    code, text = run_cli(
        ["green", "--d", "2", "--lambda", "0.5", "--beta", "0.1",
         "--domain", "box:0:3", "--from", "0,0", "--to", "1,0", "--N", "10"],
        tmp_path)
    assert code == 0
    rep = json.loads(text)
    assert rep["schema_version"] == 1
    assert rep["command"] == "green"
    g = rep["results"]["green"]
    assert set(g) == {"lower", "upper", "rigorous", "truncation_N"}
    assert g["rigorous"] is True and g["lower"] <= g["upper"]
    # instance record carries everything needed to re-run
    assert rep["instance"]["domain"] == "box:0:3"
    assert rep["instance"]["N"] == 10


def test_verify_holds_exit_zero(tmp_path):
    code, text = run_cli(
        ["verify", "sl-upper", "--d", "2", "--lambda", "1", "--beta", "0.05",
         "--S", "box:0:1", "--Lambda", "box:0:3", "--x", "3,0", "--N", "14"],
        tmp_path)
    assert code == 0
    rep = json.loads(text)
    assert rep["results"]["verdict_report"]["verdict"] == "Holds"


def test_verify_fails_exit_two(tmp_path):
    # C = 0.5 certifiably violates the pointwise condition at n=0
    code, text = run_cli(
        ["verify", "bootstrap", "--d", "2", "--lambda", "0", "--beta", "0.05",
         "--C", "0.5", "--nmax", "0", "--N", "10"],
        tmp_path)
    assert code == 2


def test_usage_error_exit_one(tmp_path):
    code = cli.main(["green", "--d", "2", "--beta", "0.1",
                     "--domain", "wedge:3", "--from", "0,0", "--to", "1,0",
                     "--N", "8"])
    assert code == 1
    assert cli.main(["no-such-command"]) == 1


def test_scan_csv_columns(tmp_path):
    code, text = run_cli(
        ["scan", "--d", "2", "--lambda", "0.5", "--beta-grid", "0.02:0.06:0.02",
         "--N", "10", "--emit", "chi,L,xi", "--format", "csv",
         "--prune-tol", "1e-13"],
        tmp_path, "scan.csv")
    assert code == 0
    lines = text.strip().splitlines()
    assert lines[0] == ",".join(cli.SCAN_COLUMNS)
    assert len(lines) == 4  # header + three betas


def test_csv_projection_scalar_command(tmp_path):
    code, text = run_cli(
        ["chi", "--d", "2", "--lambda", "0", "--beta", "0.1", "--N", "10",
         "--format", "csv"],
        tmp_path, "chi.csv")
    assert code == 0
    assert text.splitlines()[0] == "key,value"
    assert any(line.startswith("chi.lower,") for line in text.splitlines())


def test_srw_commands(tmp_path):
    code, text = run_cli(
        ["srw", "ruin", "--d", "2", "--n", "0", "--nsteps", "100"], tmp_path)
    assert code == 0
    assert json.loads(text)["results"]["ruin"]["probability"] > 0.8

    code, text = run_cli(
        ["srw", "green", "--d", "2", "--beta", "0.25",
         "--domain", "explicit:0,0;1,0", "--from", "0,0", "--to", "1,0"],
        tmp_path)
    assert code == 0
    assert abs(json.loads(text)["results"]["green_exact"]["value"] - 4 / 15) < 1e-12

    # negative coordinates need the --flag=value form (argparse heuristics)
    code, text = run_cli(
        ["srw", "coupling", "--d", "2", "--u", "1,0", "--v=-1,0",
         "--horizon", "64", "--trials", "2000", "--seed", "3",
         "--times", "16,64"],
        tmp_path)
    assert code == 0
    surv = json.loads(text)["results"]["coupling"]["survival"]
    assert surv[0] >= surv[1]


def test_mc_command(tmp_path):
    code, text = run_cli(
        ["mc", "--d", "2", "--lambda", "0.5", "--beta", "0.1",
         "--domain", "box:0:2", "--from", "0,0", "--to", "1,0",
         "--nmax", "6", "--samples", "20000", "--seed", "9"],
        tmp_path)
    assert code == 0
    res = json.loads(text)["results"]["mc"]
    assert res["samples"] == 20000 and len(res["per_length"]) == 7


def test_threads_reports_byte_identical(tmp_path):
    base = ["green", "--d", "2", "--lambda", "0.5", "--beta", "0.12",
            "--domain", "box:0:2", "--from", "1,0", "--to", "0,1",
            "--N", "12", "--prune-tol", "1e-13"]
    payloads = []
    for t in ("1", "2", "8"):
        _, text = run_cli(base + ["--threads", t], tmp_path, f"g{t}.json")
        rep = json.loads(text)
        payloads.append(json.dumps(rep["results"], sort_keys=True))
    assert payloads[0] == payloads[1] == payloads[2]


def test_report_round_trip_reproducibility(tmp_path):
    args = ["phi", "--d", "2", "--lambda", "0.3", "--beta", "0.1",
            "--S", "box:0:1", "--N", "10"]
    _, text1 = run_cli(args, tmp_path, "a.json")
    rep = json.loads(text1)
    inst = rep["instance"]
    # rebuild the invocation from the instance record alone
    rebuilt = ["phi", "--d", str(inst["d"]), "--lambda", str(inst["lam"]),
               "--beta", str(inst["beta"]), "--S", inst["S"],
               "--N", str(inst["N"]), "--prune-tol", str(inst["prune_tol"]),
               "--threads", str(inst["threads"])]
    _, text2 = run_cli(rebuilt, tmp_path, "b.json")
    rep2 = json.loads(text2)
    assert json.dumps(rep["results"], sort_keys=True) == \
           json.dumps(rep2["results"], sort_keys=True)


def test_bubble_command(tmp_path):
    code, text = run_cli(
        ["bubble", "--d", "2", "--lambda", "0", "--beta", "0.05",
         "--N", "10", "--R", "4"],
        tmp_path)
    assert code == 0
    b = json.loads(text)["results"]["bubble"]
    assert b["lower"] >= 1.0 and b["rigorous"] is True


def test_sharp_length_and_xi_commands(tmp_path):
    code, text = run_cli(
        ["sharp-length", "--d", "2", "--lambda", "0.5", "--beta", "0.02",
         "--N", "10", "--kmax", "3"],
        tmp_path)
    assert code == 0
    assert json.loads(text)["results"]["sharp_length"]["value"] == 1

    code, text = run_cli(
        ["xi", "--d", "1", "--lambda", "0", "--beta", "0.2",
         "--N", "20", "--n-list", "2,3,4"],
        tmp_path)
    assert code == 0
    assert json.loads(text)["results"]["xi"]["estimate_only"] is True


def test_error_amplitude_and_harnack_commands(tmp_path):
    code, text = run_cli(
        ["error-amplitude", "--d", "2", "--lambda", "0.5", "--beta", "0.1",
         "--S", "box:0:1", "--Lambda", "box:0:2", "--N", "10"],
        tmp_path)
    assert code == 0
    assert "total" in json.loads(text)["results"]["error_amplitude"]

    code, text = run_cli(
        ["harnack", "--d", "2", "--beta", "0.2", "--n", "1", "--alpha", "1.0",
         "--x", "4,0", "--box", "6"],
        tmp_path)
    assert code == 0
    assert json.loads(text)["results"]["harnack"]["ratio"] >= 1.0
