import json
import subprocess
import sys

import pytest

from muxopinion.cli import main


@pytest.fixture
def w_file(tmp_path):
    p = tmp_path / "w.txt"
    p.write_text("# instance W\na b L1 0.5\n")
    return p


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_opinion_instance_w(w_file, capsys):
    code, out, _ = run(["opinion", "--edges", w_file, "--budget", 2, "--gamma", 1], capsys)
    assert code == 0
    assert out.splitlines()[1:] == ["a,1.015625,0.5078125,1", "b,0.984375,0.4921875,2"]


def test_opinion_raw_and_json(w_file, capsys):
    code, out, _ = run(["opinion", "--edges", w_file, "--raw", "--budget", 2], capsys)
    assert code == 0 and out.splitlines()[1] == "a,1.125,,1"
    code, out, _ = run(["opinion", "--edges", w_file, "--budget", 2, "--format", "json"], capsys)
    assert json.loads(out)["diagnostics"]["gamma_source"] == "2x positivity bound"


def test_out_file(w_file, tmp_path, capsys):
    dest = tmp_path / "r.csv"
    code, out, _ = run(["naive", "--edges", w_file, "--budget", 2, "--out", dest], capsys)
    assert code == 0 and out == ""
    assert dest.read_text().splitlines()[1] == "a,2,1,1"


def test_validate_strict_violation(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("a b L1 0.7\nc b L1 0.6\n")
    code, out, err = run(["validate", "--edges", bad, "--normalize", "strict"], capsys)
    assert code == 2 and out == ""
    assert "'b'" in err and "'L1'" in err


def test_validate_pass(w_file, capsys):
    code, out, _ = run(["validate", "--edges", w_file, "--budget", 2], capsys)
    assert code == 0 and "verdict,pass" in out


def test_validate_failed_condition_exits_2(tmp_path, capsys):
    # all internal rate on node a and a negligible budget: a's ebar row sums to 1
    cfg = tmp_path / "c.json"
    cfg.write_text('{"budget": 1e-300}')
    alpha = tmp_path / "alpha.csv"
    alpha.write_text("node,L1\na,1\nb,0\n")
    p = tmp_path / "e.txt"
    p.write_text("b a L1 1\n")
    code, out, err = run(["validate", "--edges", p, "--config", cfg, "--alpha-file", alpha],
                         capsys)
    assert code == 2 and out == "" and "verdict,fail" in err


def test_barrel_sweep(capsys):
    code, out, _ = run(["barrel", "--nodes", 12, "--layers", 2, "--e0", 0.1, "--e1", 0.2,
                        "--e2", 0.3, "--alpha-sweep", "1:100:5", "--budget", 1], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "alpha_hat,hub1,hub2,leaf1,leaf2,max_deviation"
    assert len(lines) == 6
    final = [float(v) for v in lines[-1].split(",")[1:5]]
    assert all(abs(v - 1 / 12) < 0.01 for v in final)


def test_barrel_check_reference_forms(capsys):
    code, out, _ = run(["barrel", "--nodes", 4, "--check-table1"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "node_class,measure,computed,reference,derived,abs_diff"
    assert len(out.splitlines()) == 17


def test_barrel_bad_nodes(capsys):
    code, out, err = run(["barrel", "--nodes", 5], capsys)
    assert code == 1 and out == "" and "even" in err


def test_simulate_with_trace(w_file, tmp_path, capsys):
    trace = tmp_path / "t.csv"
    argv = ["simulate", "--edges", w_file, "--lambda", "1", "--events", 20000, "--seed", 3,
            "--delta", 0.01, "--sample-every", 5000, "--trace-out", trace]
    code, out, _ = run(argv, capsys)
    assert code == 0
    assert out.splitlines()[0] == "node,time_average,fixed_point,abs_diff"
    assert trace.read_text().splitlines()[0] == "event,node,x"
    code2, out2, _ = run(argv, capsys)
    assert out2 == out


def test_simulate_lambda_length_error(w_file, capsys):
    code, out, err = run(["simulate", "--edges", w_file, "--lambda", "1,2,3"], capsys)
    assert code == 1 and out == "" and "3 values" in err


def test_compare_and_matrix(tmp_path, capsys):
    p = tmp_path / "e.txt"
    p.write_text("a b L1 0.5\nb c L1 0.4\nc a L2 0.3\nc b L2 0.2\n")
    code, out, _ = run(["compare", "--edges", p, "--measures", "opinion,pagerank,katz"], capsys)
    assert code == 0 and out.splitlines()[0] == "measure,spearman_vs_opinion,status"
    code, out, _ = run(["compare", "--edges", p, "--measures", "opinion,katz", "--matrix"], capsys)
    assert out.splitlines()[0] == "measure,opinion,katz"


def test_bench(capsys):
    code, out, _ = run(["bench", "--sizes", "30", "--measures", "degree,opinion", "--reps", 1],
                       capsys)
    assert code == 0 and len(out.splitlines()) == 3


def test_config_precedence(w_file, tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"budget": 4, "gamma": 1}')
    assert json.loads(run(["opinion", "--edges", w_file, "--config", cfg, "--format", "json"],
                          capsys)[1])["budget"] == 4
    _, out2, _ = run(["opinion", "--edges", w_file, "--config", cfg, "--budget", 2], capsys)
    assert out2.splitlines()[1] == "a,1.015625,0.5078125,1"


def test_bad_config_and_missing_file(w_file, tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"delta": 1.5}')
    code, out, err = run(["opinion", "--edges", w_file, "--config", cfg], capsys)
    assert code == 1 and out == "" and "delta" in err
    code, out, _ = run(["opinion", "--edges", tmp_path / "missing.txt"], capsys)
    assert code == 1 and out == ""


def test_exit_codes(w_file, tmp_path, capsys, monkeypatch):
    code, out, _ = run(["opinion", "--edges", w_file, "--no-such-flag"], capsys)
    assert code == 1
    # a non-linear utility with gamma=auto needs the dense bound
    cfg = tmp_path / "c.json"
    cfg.write_text('{"utility": "cobb-douglas"}')
    code, out, err = run(["opinion", "--edges", w_file, "--config", cfg, "--max-dense", 1], capsys)
    assert code == 4 and out == "" and "cap" in err
    import muxopinion.cli as cli
    from muxopinion import NumericalError

    def boom(*a, **k):
        raise NumericalError("singular")
    monkeypatch.setattr(cli, "opinion_centrality", boom)
    code, out, err = run(["opinion", "--edges", w_file], capsys)
    assert code == 3 and out == "" and "singular" in err


def test_bench_marks_capacity_cells(capsys):
    code, out, _ = run(["bench", "--sizes", "20", "--measures", "gamma-bound", "--max-dense", 5,
                        "--reps", 1], capsys)
    assert code == 0 and "capacity" in out


def test_nonlinear_utility_via_config(w_file, tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"budget": 2, "gamma": 1, "utility": "cobb-douglas"}')
    code, out, _ = run(["opinion", "--edges", w_file, "--config", cfg], capsys)
    assert code == 0
    vals = [float(line.split(",")[1]) for line in out.splitlines()[1:]]
    assert sum(vals) == pytest.approx(2.0, abs=1e-9)


def test_module_entry_point(w_file):
    proc = subprocess.run([sys.executable, "-m", "muxopinion.cli", "opinion", "--edges", str(w_file),
                           "--budget", "2", "--gamma", "1"], capture_output=True, text=True)
    assert proc.returncode == 0 and "0.5078125" in proc.stdout
