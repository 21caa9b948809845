import json
import os
import subprocess
import sys

import pytest

from conftest import SPECS
from relconj.cli import main, resolve_max_elements
from relconj.groups import DEFAULT_MAX_ELEMENTS, conjugate, group_from_spec


@pytest.fixture
def files(write_json):
    def _files(group, a, b):
        return str(write_json("group.json", SPECS[group])), str(write_json("inst.json", {"a": a, "b": b}))

    return _files


def run(capsys, *argv):
    code = main([str(x) for x in argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else out)


def test_solve_conjugate(capsys, files):
    g, i = files("z2z3", ["s t"], ["t s"])
    code, rep = run(capsys, "solve", g, i)
    assert code == 0
    assert rep["decision"]["status"] == "conjugate" and rep["decision"]["witness"] == "s"
    assert rep["command"] == "solve" and "version" in rep
    code, rep2 = run(capsys, "verify", g, i, rep["decision"]["witness"])
    assert code == 0 and rep2["valid"]


def test_solve_identity(capsys, files):
    g, i = files("z2z3", ["s t", "t"], ["s t", "t"])
    code, rep = run(capsys, "solve", g, i)
    assert code == 0 and rep["decision"]["witness"] == ""


def test_solve_inconclusive(capsys, files):
    g, i = files("z2z3", ["t"], ["t^-1"])
    code, rep = run(capsys, "solve", g, i, "--max-radius", "3")
    assert code == 2 and rep["decision"]["status"] == "inconclusive"
    assert rep["decision"]["radius"] == "3"


def test_solve_certified_not_conjugate(capsys, files, write_json):
    g, i = files("z2z3", ["t"], ["t^-1"])
    c = write_json("c.json", {"chi": {"1": 0}, "eta": {"1,0,0": 0}, "theta": {"1": 0}, "certified": True})
    code, _ = run(capsys, "solve", g, i, "--mode", "certified", "--constants", c)
    assert code == 3
    code, rep = run(capsys, "solve", g, i, "--mode", "certified", "--constants", c, "--force-profile")
    assert code == 1 and rep["decision"]["status"] == "not_conjugate"
    assert rep["bounds"] == {"L": "16", "R": "0"}
    code, _ = run(capsys, "solve", g, i, "--mode", "certified")
    assert code == 4


def test_solve_inconsistent_duplicates(capsys, files):
    g, i = files("free_pq", ["p", "p"], ["p", "q"])
    code, rep = run(capsys, "solve", g, i)
    assert code == 1 and rep["decision"]["status"] == "not_conjugate"


def test_input_errors(capsys, files, tmp_path):
    g, i = files("z2z3", ["s t"], ["t s"])
    assert run(capsys, "solve", tmp_path / "missing.json", i)[0] == 3
    assert run(capsys, "verify", g, i, "s ^ t")[0] == 3
    assert run(capsys, "verify", g, i, "z")[0] == 3
    assert run(capsys, "verify", g, i, "")[0] == 1
    assert run(capsys, "verify", g, i, "s")[0] == 0
    with pytest.raises(SystemExit) as exc:
        main(["solve", g])
    assert exc.value.code == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "solve", bad, i)[0] == 3


def test_shorten(capsys, files):
    g, i = files("zz_pq", ["p"], ["q^-1 p q"])
    code, rep = run(capsys, "shorten", g, i, "p p q")
    assert code == 0 and rep["output"] == "q"
    assert (rep["relative_length_before"], rep["relative_length_after"]) == (2, 1)
    assert rep["steps"] == [{"s": 0, "t": 1, "before": 2, "after": 1}]
    code, rep = run(capsys, "shorten", g, i, "q")
    assert rep["output"] == "q" and rep["relative_length_before"] == rep["relative_length_after"]
    assert run(capsys, "shorten", g, i, "p")[0] == 5


def test_compress(capsys, files):
    g, i = files("zz_uv", ["u"], ["u"])
    code, rep = run(capsys, "compress", g, i, "u u u")
    assert code == 0 and rep["output"] == ""
    assert [s["case"] for s in rep["syllables"]] == ["case2"] and rep["syllables"][0]["witness"] == ""
    g, i = files("zz_pq", ["p"], ["q^-1 p q"])
    code, rep = run(capsys, "compress", g, i, "q")
    assert rep["output"] == "q" and [s["case"] for s in rep["syllables"]] == ["case1"]
    g, i = files("free_pq", ["p"], ["q^-1 p q"])
    code, rep = run(capsys, "compress", g, i, "q")
    assert rep["output"] == "q" and [s["case"] for s in rep["syllables"]] == ["free_letter"]
    g, i = files("zz_uv", ["u"], ["v^-1 u v"])
    code, rep = run(capsys, "compress", g, i, "u u u v")
    assert code == 0 and rep["output"] == "v"
    assert run(capsys, "verify", g, i, rep["output"])[0] == 0
    assert run(capsys, "compress", g, i, "u")[0] == 5


def test_compress_missing_oracle(capsys, write_json):
    # a rank-2 free factor has no parabolic oracle
    spec = {"kind": "free_product", "factors": [{"kind": "free", "generators": ["p", "q"]}, SPECS["z3"]]}
    g = write_json("g.json", spec)
    i = write_json("i.json", {"a": ["p"], "b": ["p"]})
    assert run(capsys, "compress", g, i, "p")[0] == 3


class _Refusing:
    def solve(self, g_list, f_list):
        return None

    def theta_bound(self, mu):
        return 0


def test_compress_oracle_failure(capsys, files, monkeypatch):
    import relconj.oracles

    monkeypatch.setattr(relconj.oracles, "default_oracles", lambda group: {0: _Refusing(), 1: _Refusing()})
    g, i = files("zz_uv", ["u"], ["u"])
    assert run(capsys, "compress", g, i, "u u")[0] == 6


def test_bound(capsys, write_json):
    c = write_json("c.json", {"chi": {"0": 0, "1": 1}, "eta": {"1,0,1": 3}, "theta": {"1": 2}})
    code, rep = run(capsys, "bound", "--mu", 1, "--alphabet-size", 2, "--constants", c)
    assert code == 0 and rep["L"] == "27" and rep["R"] == "81"
    code, rep = run(capsys, "bound", "--mu", 0, "--alphabet-size", 2, "--constants", c)
    assert code == 4
    c2 = write_json("c2.json", {"chi": {"0": 1}})
    assert run(capsys, "bound", "--mu", 0, "--alphabet-size", 2, "--constants", c2)[0] == 4
    assert run(capsys, "bound", "--mu", 2, "--alphabet-size", 2, "--constants", c)[0] == 4
    c3 = write_json("c3.json", {"chi": {"6": 6}, "eta": {"1,0,6": 1}, "theta": {"6": 1}})
    code, rep = run(capsys, "bound", "--mu", 6, "--alphabet-size", 6, "--constants", c3)
    assert code == 0 and rep["L"] == rep["R"] and len(rep["L"]) > 100000
    assert rep["L"].isdigit()


def test_calibrate(capsys, files):
    g, _ = files("z2z3", ["s"], ["s"])
    code, rep = run(capsys, "calibrate", g, "--k", 0, "--samples", 50, "--seed", 42)
    assert code == 0 and rep["chi_lower_estimate"] == 0
    code, rep = run(capsys, "calibrate", g, "--k", 2, "--samples", 1000, "--seed", 42)
    assert rep["chi_lower_estimate"] == 2 and set(rep["witness"]) == {"a", "x"}
    g, _ = files("z2", ["u"], ["u"])
    assert run(capsys, "calibrate", g, "--k", 1)[0] == 3


def _bench_suite(tmp_path, n=10, seed=7):
    import random

    group = group_from_spec(SPECS["free_pq"])
    rng = random.Random(seed)
    gens = ["p", "q", "p^-1", "q^-1"]
    entries = []
    for j in range(n):
        a = [" ".join(rng.choice(gens) for _ in range(rng.randint(1, 3))) for _ in range(rng.randint(1, 2))]
        x = group.parse(" ".join(rng.choice(gens) for _ in range(rng.randint(0, 3))))
        b = [str(conjugate(group.parse(w), x)) for w in a]
        name = f"i{j}.json"
        (tmp_path / name).write_text(json.dumps({"a": a, "b": b}))
        entries.append({"instance": name, "expect": "conjugate"})
    suite = tmp_path / "suite.json"
    suite.write_text(json.dumps({"instances": entries}))
    return suite


def test_bench(capsys, files, tmp_path):
    g, _ = files("free_pq", ["p"], ["p"])
    suite = _bench_suite(tmp_path)
    code = main(["bench", g, str(suite)])
    captured = capsys.readouterr()
    rep = json.loads(captured.out)
    assert code == 0 and len(rep["rows"]) == 10
    assert all(r["status"] == "conjugate" and r["expect_met"] for r in rep["rows"])
    assert captured.err.splitlines()[0].split()[:2] == ["instance", "status"]
    empty = tmp_path / "empty.json"
    empty.write_text(json.dumps({"instances": []}))
    code, rep = run(capsys, "bench", g, empty)
    assert code == 0 and rep["rows"] == []
    assert run(capsys, "bench", tmp_path / "nope.json", suite)[0] == 3
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps({"instances": [{"instance": "i0.json", "group": "nope.json"}]}))
    assert run(capsys, "bench", g, broken)[0] == 3


def test_pretty_output(capsys, files):
    g, i = files("z2z3", ["s t"], ["t s"])
    code = main(["solve", g, i, "--pretty"])
    out = capsys.readouterr().out
    assert code == 0 and "witness" in out and not out.startswith("{")


def test_max_elements_precedence(monkeypatch):
    monkeypatch.delenv("RELCONJ_MAX_ELEMENTS", raising=False)
    assert resolve_max_elements(None) == DEFAULT_MAX_ELEMENTS == 10**7
    monkeypatch.setenv("RELCONJ_MAX_ELEMENTS", "50")
    assert resolve_max_elements(None) == 50
    assert resolve_max_elements(7) == 7


def test_cap_reported_as_inconclusive(capsys, files, monkeypatch):
    g, i = files("free_pq", ["p"], ["q"])
    monkeypatch.setenv("RELCONJ_MAX_ELEMENTS", "30")
    code, rep = run(capsys, "solve", g, i, "--max-radius", "6")
    assert code == 2 and "exceeded" in rep["decision"]["reason"]
    code, rep = run(capsys, "solve", g, i, "--max-radius", "3", "--max-elements", "1000")
    assert code == 2 and "reason" not in rep["decision"]


def _cli(*argv, env=None):
    return subprocess.run(
        [sys.executable, "-m", "relconj", *map(str, argv)],
        capture_output=True,
        text=True,
        env={**os.environ, **(env or {})},
    )


def test_subprocess_byte_identical(files):
    g, i = files("z2z3", ["s t", "t"], ["t s", "s t s"])
    first = _cli("solve", g, i, "--workers", "2")
    second = _cli("solve", g, i, "--workers", "2")
    serial = _cli("solve", g, i)
    assert first.returncode == 0
    assert first.stdout == second.stdout == serial.stdout
    json.loads(first.stdout)


def test_subprocess_env_cap(files):
    g, i = files("free_pq", ["p"], ["q"])
    proc = _cli("solve", g, i, env={"RELCONJ_MAX_ELEMENTS": "30"})
    assert proc.returncode == 2
    proc = _cli("solve", g, i, "--max-elements", "10", "--max-radius", "1", env={"RELCONJ_MAX_ELEMENTS": "1"})
    assert proc.returncode == 2 and "reason" not in json.loads(proc.stdout)["decision"]
