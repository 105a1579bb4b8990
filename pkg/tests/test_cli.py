"""End-to-end CLI runs in a subprocess with an isolated cache directory."""

import json
import os
import subprocess
import sys

import pytest


@pytest.fixture(scope="module")
def cli_env(tmp_path_factory):
    env = os.environ.copy()
    env["UNISET_CACHE_DIR"] = str(tmp_path_factory.mktemp("ucache"))
    env.pop("THREADS", None)
    env.pop("SEARCH_CAP", None)
    return env


def cli(env, *argv):
    return subprocess.run(
        [sys.executable, "-m", "uniset.cli", *argv],
        capture_output=True,
        text=True,
        env=env,
    )


def test_enumerate_count_only(cli_env):
    p = cli(cli_env, "enumerate", "--c", "2", "--k", "4", "--count-only",
            "--format", "json")
    assert p.returncode == 0
    assert json.loads(p.stdout) == {"c": "2", "k": "4", "count": "105"}


def test_enumerate_limit_lists_members(cli_env):
    p = cli(cli_env, "enumerate", "--c", "2", "--k", "4", "--limit", "2",
            "--format", "json")
    doc = json.loads(p.stdout)
    assert doc["count"] == "105" and len(doc["items"]) == 2
    assert doc["items"][0] == {"id": 0, "blocks": [[1, 2], [3, 4], [5, 6], [7, 8]]}


def test_count_formula_h_frozen(cli_env):
    p = cli(cli_env, "count-formula", "h", "--c", "2", "--k", "4", "--t", "1",
            "--format", "json")
    assert p.returncode == 0
    assert json.loads(p.stdout)["values"] == {
        "h1": "630", "h2": "648", "h3": "504", "h4": "684",
    }


def test_count_formula_s_is_z_alias(cli_env):
    a = cli(cli_env, "count-formula", "theta", "--c", "2", "--k", "4", "--z", "1")
    b = cli(cli_env, "count-formula", "theta", "--c", "2", "--k", "4", "--s", "1")
    assert a.stdout == b.stdout and a.stdout.strip() == "15"


def test_count_formula_missing_arg_is_usage_error(cli_env):
    p = cli(cli_env, "count-formula", "theta", "--c", "2", "--k", "4")
    assert p.returncode == 2 and "error" in p.stderr.lower()


def test_search_json_schema_and_determinism(cli_env):
    runs = [
        cli(cli_env, "search", "--c", "2", "--k", "3", "--t", "1",
            "--objective", "product", "--format", "json", *extra)
        for extra in ((), (), ("--threads", "4"))
    ]
    assert all(p.returncode == 0 for p in runs)
    assert runs[0].stdout == runs[1].stdout == runs[2].stdout
    doc = json.loads(runs[0].stdout)
    assert doc["value"] == "9" and doc["certified"] is True
    assert len(doc["optima"]) == 25
    assert "runtime_ms" not in doc
    star = next(o for o in doc["optima"] if o["class"] == "StarPair")
    assert star["anchors"]["T"] == [[1, 2]]
    assert all(isinstance(i, int) for i in star["F"])


def test_search_timing_flag(cli_env):
    p = cli(cli_env, "search", "--c", "2", "--k", "3", "--t", "1",
            "--objective", "sum", "--format", "json", "--timing")
    doc = json.loads(p.stdout)
    assert isinstance(doc["runtime_ms"], int)


def test_search_constrained_c52(cli_env):
    p = cli(cli_env, "search", "--c", "2", "--k", "3", "--t", "1",
            "--objective", "product", "--constraint", "tau-g-min=2",
            "--format", "json")
    doc = json.loads(p.stdout)
    assert doc["value"] == "9"
    assert [o["class"] for o in doc["optima"]] == ["C52"] * 10
    anchors = doc["optima"][0]["anchors"]
    assert {"E", "u", "v"} <= set(anchors)


def test_search_csv_matches_json(cli_env):
    j = cli(cli_env, "search", "--c", "2", "--k", "3", "--t", "1",
            "--objective", "sum", "--format", "json")
    c = cli(cli_env, "search", "--c", "2", "--k", "3", "--t", "1",
            "--objective", "sum", "--format", "csv")
    doc = json.loads(j.stdout)
    lines = c.stdout.strip().splitlines()
    assert lines[0] == "F,G,class"
    assert len(lines) == 1 + len(doc["optima"])
    first = doc["optima"][0]
    assert lines[1].split(",")[0] == " ".join(str(i) for i in first["F"])


def test_search_element_cap(cli_env):
    p = cli(cli_env, "search", "--c", "2", "--k", "7", "--t", "1",
            "--objective", "product")
    assert p.returncode == 2
    assert "cap" in p.stderr.lower()


def test_t_zero_is_domain_error(cli_env):
    p = cli(cli_env, "search", "--c", "2", "--k", "3", "--t", "0",
            "--objective", "product")
    assert p.returncode == 2


def test_verify_theorem_sporadic_exit0(cli_env):
    p = cli(cli_env, "verify-theorem", "--id", "sporadic", "--format", "json")
    assert p.returncode == 0
    (rep,) = json.loads(p.stdout)["reports"]
    assert rep["verdict"] == "confirmed"
    assert rep["evidence"]["classes"] == {"C52": "10", "SingletonBall": "15"}


def test_verify_theorem_exploratory_exit1(cli_env):
    p = cli(cli_env, "verify-theorem", "--id", "product", "--c", "2", "--k", "3",
            "--t", "1", "--method", "exhaustive", "--format", "json")
    assert p.returncode == 1
    (rep,) = json.loads(p.stdout)["reports"]
    assert rep["verdict"] == "exploratory"
    assert rep["params"]["hypothesis_ok"] == "false"


def test_verify_theorem_unknown_id(cli_env):
    p = cli(cli_env, "verify-theorem", "--id", "everything")
    assert p.returncode == 2


def test_verify_theorem_threads_byte_identical(cli_env):
    runs = [
        cli(cli_env, "verify-theorem", "--id", "inequalities", "--format", "json",
            "--threads", n)
        for n in ("1", "4")
    ]
    assert runs[0].stdout == runs[1].stdout
    assert runs[0].returncode == 0


def test_verify_inequalities_battery(cli_env):
    p = cli(cli_env, "verify-inequalities")
    assert p.returncode == 0
    assert p.stdout.splitlines()[0] == "16356 instances, 0 violations, 0 skipped"


def test_verify_inequalities_ranged_exit1(cli_env):
    # outside its hypothesis this bound genuinely fails; the scan records
    # the instance as exploratory and signals via the exit code
    p = cli(cli_env, "verify-inequalities", "--lemma", "6.1ii",
            "--c-range", "3:3", "--k-range", "4:4", "--t-range", "2:2",
            "--format", "json")
    assert p.returncode == 1
    doc = json.loads(p.stdout)
    assert doc["total"] == "1" and doc["violations"] == "1"
    inst = doc["instances"][0]
    assert inst["hypothesis_ok"] is False and inst["holds"] is False


def test_verify_inequalities_bad_lemma(cli_env):
    p = cli(cli_env, "verify-inequalities", "--lemma", "9.9")
    assert p.returncode == 2


def test_construct_c52_predicate_check(cli_env):
    p = cli(cli_env, "construct", "--kind", "C52", "--c", "2", "--k", "3",
            "--t", "1", "--emit", "predicate-check", "--format", "json")
    assert p.returncode == 0
    doc = json.loads(p.stdout)
    assert doc["mode"] == "exact"
    assert [ch["verdict"] for ch in doc["checks"]] == ["confirmed", "confirmed"]
    assert doc["partner"]["side"] == "G"


def test_construct_size_and_members(cli_env):
    p = cli(cli_env, "construct", "--kind", "star", "--c", "2", "--k", "3",
            "--t", "1", "--emit", "size", "--format", "json")
    doc = json.loads(p.stdout)
    assert doc["predicted"] == "3" and doc["enumerated"] == "3" and doc["match"]
    p = cli(cli_env, "construct", "--kind", "star", "--c", "2", "--k", "3",
            "--t", "1", "--emit", "members", "--format", "json")
    doc = json.loads(p.stdout)
    assert doc["size"] == "3"
    assert all(m["blocks"][0] == [1, 2] for m in doc["members"])


def test_covers_by_ids(cli_env):
    p = cli(cli_env, "covers", "--family", "ids:0", "--c", "2", "--k", "3",
            "--t", "1", "--report", "covers", "--format", "json")
    doc = json.loads(p.stdout)
    assert doc["tau"] == "1" and doc["count"] == "3"
    assert doc["covers"] == [[[1, 2]], [[3, 4]], [[5, 6]]]


def test_covers_structure_n2(cli_env):
    p = cli(cli_env, "covers", "--family",
            '{"kind": "N2", "c": 2, "k": 4, "t": 1, "Z": [[1, 2], [3, 4], [5, 6]]}',
            "--report", "structure", "--format", "json")
    assert p.returncode == 0
    doc = json.loads(p.stdout)
    assert doc["tau"] == "2" and len(doc["bases"]) == 3
    for base in doc["bases"]:
        assert base["m"] == "3" and base["union_valid"] and base["covers_complete"]


def test_cache_lifecycle(cli_env, tmp_path):
    cdir = str(tmp_path)
    build = cli(cli_env, "cache", "build", "--c", "2", "--k", "3",
                "--cache-dir", cdir, "--format", "json")
    assert build.returncode == 0
    path = json.loads(build.stdout)["path"]
    ok = cli(cli_env, "cache", "validate", "--c", "2", "--k", "3",
             "--cache-dir", cdir)
    assert ok.returncode == 0

    body = open(path).read().replace('"count":15', '"count":14', 1)
    open(path, "w").write(body)
    bad = cli(cli_env, "cache", "validate", "--c", "2", "--k", "3",
              "--cache-dir", cdir, "--format", "json")
    assert bad.returncode == 1
    assert json.loads(bad.stdout)["ok"] is False

    # library path: a corrupt cache is rebuilt in place with a warning
    rebuilt = cli(cli_env, "enumerate", "--c", "2", "--k", "3", "--limit", "1",
                  "--cache-dir", cdir, "--format", "json")
    assert rebuilt.returncode == 0
    assert "rebuilding corrupt cache" in rebuilt.stderr
    assert cli(cli_env, "cache", "validate", "--c", "2", "--k", "3",
               "--cache-dir", cdir).returncode == 0

    clear = cli(cli_env, "cache", "clear", "--c", "2", "--k", "3",
                "--cache-dir", cdir, "--format", "json")
    assert json.loads(clear.stdout)["removed"] is True
    missing = cli(cli_env, "cache", "validate", "--c", "2", "--k", "3",
                  "--cache-dir", cdir)
    assert missing.returncode == 1


def test_formula_suite_exit0(cli_env):
    p = cli(cli_env, "formula-suite", "--format", "csv")
    assert p.returncode == 0
    header = p.stdout.splitlines()[0]
    assert header == "kind,params,check,verdict,observed,expected,detail"
    assert ",refuted," not in p.stdout and ",inconclusive," not in p.stdout
