import subprocess
import sys

import pytest

from vrpbench.cli import main
from vrpbench.harness import parse_protocol_line
from vrpbench.instance import check_feasibility, evaluate_cost
from vrpbench.vrplib import BksRecord, read_bks_file, read_vrplib, write_bks_file


def _generate(tmp_path, *extra):
    out = tmp_path / "inst"
    assert main(["generate", "--out", str(out), *extra]) == 0
    return sorted(out.glob("*.vrp"))


@pytest.mark.parametrize("extra, n, depot", [
    (["--n", "20", "--count", "2", "--seed", "3"], 20, None),
    (["--coords", "x", "--n", "30", "--depot", "central", "--demands", "x",
      "--route-size", "6"], 30, [500, 500]),
    (["--coords", "gm", "--modes", "2", "--n", "15", "--demands", "gamma(2,3)",
      "--capacity", "200"], 15, None),
])
def test_generate(tmp_path, capsys, extra, n, depot):
    files = _generate(tmp_path, *extra)
    assert capsys.readouterr().out.split() == [str(f) for f in files]
    for f in files:
        inst = read_vrplib(f)
        assert inst.n == n
        if depot:
            assert inst.coords[0].tolist() == depot


def test_generate_rejects_bad_demands(tmp_path):
    with pytest.raises(SystemExit):
        main(["generate", "--out", str(tmp_path), "--demands", "lots"])


def test_generate_config_error_exit_code(tmp_path):
    assert main(["generate", "--out", str(tmp_path), "--coords", "x",
                 "--demands", "1-100", "--capacity", "20"]) == 2


def test_solve_base_protocol(tmp_path):
    path = _generate(tmp_path, "--n", "25")[0]
    inst = read_vrplib(path)
    proc = subprocess.run(
        [sys.executable, "-m", "vrpbench", "solve-base", "--instance", str(path),
         "--time-limit", "5", "--seed", "1", "--max-moves", "20000",
         "--out", str(tmp_path / "sol.txt")],
        capture_output=True, text=True, check=True)
    lines = proc.stdout.splitlines()
    assert lines[-1] == "DONE"
    events = [parse_protocol_line(line) for line in lines[:-1]]
    costs = [e.cost for e in events]
    assert costs == sorted(costs, reverse=True) and len(set(costs)) == len(costs)
    for e in events:
        assert check_feasibility(inst, e.routes).ok
        assert evaluate_cost(inst, e.routes) == e.cost
    assert float((tmp_path / "sol.txt").read_text().split()[0]) == costs[-1]


def test_bks_show_and_update(tmp_path, capsys):
    files = _generate(tmp_path, "--n", "10")
    inst = read_vrplib(files[0])
    bks = tmp_path / "bks.txt"
    write_bks_file(bks, {})
    # a results file produced by a short run gives the update candidates
    out = tmp_path / "res"
    assert main(["run", str(files[0]), "--time-limit", "0.5", "--runs", "1",
                 "--out", str(out)]) == 0
    capsys.readouterr()
    assert main(["bks", "update", "--bks", str(bks), "--instances", str(files[0]),
                 "--results", str(out / "results.jsonl")]) == 0
    assert "improved" in capsys.readouterr().out
    record = read_bks_file(bks)[inst.id]
    assert check_feasibility(inst, record.routes).ok
    assert main(["bks", "show", inst.id, "missing", "--bks", str(bks)]) == 0
    shown = capsys.readouterr().out.splitlines()
    assert shown[0].startswith(f"{inst.id} {record.cost!r} savings+sa not_opt")
    assert shown[1] == "missing -"


def test_bks_update_keeps_optimal(tmp_path, capsys):
    files = _generate(tmp_path, "--n", "10")
    inst = read_vrplib(files[0])
    out = tmp_path / "res"
    main(["run", str(files[0]), "--time-limit", "0.5", "--runs", "1", "--out", str(out)])
    bks = tmp_path / "bks.txt"
    singles = [[c] for c in range(1, inst.n + 1)]
    write_bks_file(bks, {inst.id: BksRecord(inst.id, evaluate_cost(inst, singles), singles,
                                            "manual", True)})
    capsys.readouterr()
    main(["bks", "update", "--bks", str(bks), "--results", str(out / "results.jsonl")])
    assert "rejected" in capsys.readouterr().out
    assert read_bks_file(bks)[inst.id].algorithm == "manual"


def test_report_rebuilds_from_results(tmp_path, capsys):
    files = _generate(tmp_path, "--n", "10", "--count", "2")
    out = tmp_path / "res"
    machine = tmp_path / "m.toml"
    machine.write_text("[machine]\ncpu_mark_single = 2000\n")
    assert main(["run", *map(str, files), "--time-limit", "0.5", "--runs", "1",
                 "--machine", str(machine), "--set-name", "tiny", "--out", str(out)]) == 0
    first = (out / "report.txt").read_text()
    capsys.readouterr()
    assert main(["report", str(out / "results.jsonl"), "--out", str(tmp_path / "again")]) == 0
    assert capsys.readouterr().out == first
    assert (tmp_path / "again" / "report.txt").read_text() == first
    assert "tiny" in first and "AVG" in first


def test_missing_file_exit_code(tmp_path):
    assert main(["report", str(tmp_path / "none.jsonl")]) == 2
