import json
import subprocess
import sys

import pytest

from fase import analysis, cli, corpus
from fase.syntax import parse, pretty


def run(capsys, *argv):
    try:
        code = cli.main(list(argv))
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write


def gen_file(files, family, n=None):
    term = corpus.gen_buffer(family, n) if n else corpus.gen_pathological(family)
    return files(f"{family}{n or ''}.pafas", pretty(term) + "\n")


def test_check(capsys, files):
    assert run(capsys, "check", files("ok.pafas", "rec x. in.out.x"))[0] == 0
    code, _, err = run(capsys, "check", files("bad.pafas", "a.\n"))
    assert code == 2 and "bad.pafas:2:1:" in err
    assert run(capsys, "check", "-e", "rec x. (x + a.nil)")[0] == 3


def test_input_source_required(capsys, files):
    assert run(capsys, "check")[0] == 2
    assert run(capsys, "check", files("a.pafas", "nil"), "-e", "nil")[0] == 2


def test_graph(capsys, files):
    code, out, _ = run(capsys, "graph", "-e", "nil", "--dot")
    assert code == 0 and out.count("[label=") == 2 and "t:FULL" in out
    code, out, _ = run(capsys, "graph", gen_file(files, "fifo", 1), "--kind", "rrts", "--json")
    assert code == 0 and json.loads(out)["stats"]["n"] >= 4
    assert run(capsys, "graph", "-e", "a.nil", "--kind", "rrts")[0] == 4


def test_catastrophic(capsys, files):
    code, out, _ = run(capsys, "catastrophic", gen_file(files, "fifo", 2))
    assert code == 0 and out.strip() == "none"
    code, out, _ = run(capsys, "catastrophic", gen_file(files, "tau_divergent"))
    assert code == 1 and out.startswith("catastrophic cycle:")
    code, out, _ = run(capsys, "catastrophic", gen_file(files, "tau_divergent"), "--json")
    data = json.loads(out)
    assert data["result"]["kind"] == "catastrophic"
    nodes = data["result"]["witness"]["nodes"]
    assert nodes[0] == nodes[-1]


def test_factor(capsys, files):
    assert run(capsys, "factor", gen_file(files, "fifo", 1))[1].splitlines()[0] == "2/1"
    assert run(capsys, "factor", gen_file(files, "buff", 1))[1].splitlines()[0] == "4/1"
    code, _, err = run(capsys, "factor", gen_file(files, "tau_divergent"))
    assert code == 5 and "catastrophic-present" in err
    _, out, _ = run(capsys, "factor", gen_file(files, "pipe", 1), "--json")
    assert json.loads(out)["result"]["factor"] == {"num": 2, "den": 1}


def test_rp(capsys, files):
    assert run(capsys, "rp", gen_file(files, "fifo", 1), "-n", "3")[1].splitlines()[0] == "6"
    code, out, _ = run(capsys, "rp", gen_file(files, "pipe", 1), "-n", "2", "--oracle", "--json")
    result = json.loads(out)["result"]
    assert code == 0 and result["kind"] == "finite" and result["value"] == 6
    assert "elapsed_ms" not in result["stats"]
    _, out, _ = run(capsys, "rp", "-e", "in.out.nil", "-n", "2", "--json", "--timing")
    result = json.loads(out)["result"]
    assert result["kind"] == "infinite" and "elapsed_ms" in result["stats"]
    assert run(capsys, "rp", "-e", "in.out.nil", "-n", "0")[0] == 2


def test_rp_oracle_mismatch(capsys, monkeypatch):
    monkeypatch.setattr(analysis, "performance", lambda *a, **k: analysis.PerfResult(99))
    code, _, err = run(capsys, "rp", "-e", "rec x. in.out.x", "-n", "1", "--oracle")
    assert code == 6 and "99" in err


def test_perf(capsys, files):
    user = files("u1.pafas", "_in._out._omega.nil")
    cell = files("cell.pafas", "rec x. in.out.x")
    assert run(capsys, "perf", cell, user)[1].strip() == "2"
    assert run(capsys, "perf", cell, user, "-D", "2")[1].splitlines() == ["2", "satisfied"]
    assert run(capsys, "perf", cell, "--test-term", "_in._out._omega.nil", "-D", "1")[1].splitlines()[1] == "not satisfied"
    assert run(capsys, "perf", "-e", "nil", user)[1].strip() == "infinite"


def test_traces(capsys):
    assert run(capsys, "traces", "-e", "nil", "--depth", "1")[1] == "1\n"
    assert run(capsys, "traces", "-e", "_tau.nil", "--depth", "1")[1] == "tau\n"
    code, out, _ = run(capsys, "traces", "-e", "a.nil", "--depth", "1", "--kind", "refusal")
    assert code == 0 and set(out.split()) == {"a", "{a}"}
    assert run(capsys, "traces", "-e", "rec x. (a.x + b.x)", "--depth", "9", "--trace-cap", "10")[0] == 7


def test_gen(capsys):
    code, out, _ = run(capsys, "gen", "fifo", "1")
    assert code == 0 and parse(out) == corpus.gen_fifo(1)
    assert "link1->tau" in run(capsys, "gen", "pipe", "1")[1]
    assert run(capsys, "gen", "buff", "0")[0] == 2
    assert run(capsys, "gen", "tau_divergent", "3")[0] == 2


def test_state_cap(capsys, files):
    code, _, err = run(capsys, "graph", gen_file(files, "pipe", 2), "--max-states", "10")
    assert code == 7 and "state-cap" in err


def test_deterministic_output(files):
    path = gen_file(files, "buff", 1)
    commands = [
        ["catastrophic", path, "--json"],
        ["factor", path, "--json"],
        ["rp", path, "-n", "3", "--json"],
        ["graph", path, "--kind", "rrts", "--dot"],
        ["traces", path, "--depth", "4", "--kind", "refusal"],
    ]
    for argv in commands:
        outputs = {
            subprocess.run([sys.executable, "-m", "fase", *argv], capture_output=True, check=True).stdout
            for _ in range(2)
        }
        assert len(outputs) == 1, argv
