import json
import math

import pytest

from cowpath.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def gen(tmp_path, capsys):
    def make(name, *flags):
        f = tmp_path / name
        code, out, _ = run(capsys, "generate", *flags, "--out", str(f))
        assert code == 0, out
        return f

    return make


# -- generate ------------------------------------------------------------------------------


def test_generate_cross_polytope(gen, capsys):
    f = gen("cp.json", "--kind", "cross-polytope", "--dim", "8")
    doc = json.loads(f.read_text())
    assert doc["dimension"] == 8 and len(doc["vertices"]) == 17
    code, out, _ = run(capsys, "evaluate", str(f), "--samples", "2000")
    res = json.loads(out)
    assert code == 0 and res["coverage"]["verdict"]
    assert res["d"] == 8 and res["length"] == pytest.approx(math.sqrt(8) + 15 * 4, rel=1e-12)


def test_generate_summary(tmp_path, capsys):
    code, out, _ = run(capsys, "generate", "--kind", "cross-polytope", "--dim", "8", "--out", str(tmp_path / "a.json"))
    assert code == 0
    assert out.strip() == f"d=8 vertices=17 length={math.sqrt(8) + 15 * 4:.6f}"


def test_generate_doubling_stdout(capsys):
    code, out, err = run(capsys, "generate", "--kind", "doubling1d", "--kmax", "3")
    assert code == 0
    assert [v[0] for v in json.loads(out)["vertices"]] == [0, 1, -2, 4, -8]
    assert "vertices=5" in err


def test_generate_missing_dim(capsys):
    code, _, err = run(capsys, "generate", "--kind", "cross-polytope")
    assert code == 1
    assert "--dim" in err


def test_generate_bad_kind(capsys):
    code, _, _ = run(capsys, "generate", "--kind", "zigzag")
    assert code == 1


def test_generate_csv_and_points(tmp_path, capsys):
    f = tmp_path / "s.csv"
    pts = tmp_path / "pts.csv"
    code, _, _ = run(capsys, "generate", "--kind", "log-spiral", "--out", str(f), "--emit-points", str(pts))
    assert code == 0
    assert f.read_text().startswith("x1,x2\n")
    assert pts.read_text() == f.read_text()


def test_emit_points_refuses_high_dim(tmp_path, capsys):
    code, _, err = run(
        capsys, "generate", "--kind", "cross-polytope", "--dim", "5",
        "--out", str(tmp_path / "a.json"), "--emit-points", str(tmp_path / "p.csv"),
    )
    assert code == 1 and "d <= 3" in err


def test_generate_confined(gen):
    f = gen("c.json", "--kind", "confined-random", "--dim", "16", "--length", "3", "--steps", "6", "--seed", "4")
    assert json.loads(f.read_text())["dimension"] == 16


# -- evaluate --------------------------------------------------------------------------------


def test_evaluate_cross_polytope_3d(gen, capsys):
    f = gen("cp3.json", "--kind", "cross-polytope", "--dim", "3")
    code, out, _ = run(capsys, "evaluate", str(f), "--directions", "64", "--offsets", "16")
    doc = json.loads(out)
    assert code == 0
    assert doc["coverage"]["mode"] == "exact-low-d" and doc["coverage"]["verdict"]
    assert doc["ratio"]["unbounded"] is False and doc["ratio"]["sup_ratio"] >= 1
    assert doc["version"] and doc["input_digest"].startswith("sha256:")
    assert doc["seed"] == 0 and doc["config"]["seed"] == 0


def test_evaluate_ray_exit_2(tmp_path, capsys):
    f = tmp_path / "ray.json"
    f.write_text(json.dumps({"dimension": 3, "vertices": [[0, 0, 0], [3, 0, 0]]}))
    code, out, _ = run(capsys, "evaluate", str(f))
    doc = json.loads(out)
    assert code == 2
    assert doc["coverage"]["verdict"] is False
    assert doc["coverage"]["uncovered_witnesses"][0] == [-1.0, 0.0, 0.0]
    assert doc["ratio"]["unbounded"] is True


def test_evaluate_doubling_ratio(gen, capsys):
    f = gen("dbl.json", "--kind", "doubling1d", "--kmax", "20")
    code, out, _ = run(capsys, "evaluate", str(f))
    doc = json.loads(out)
    assert code == 0
    assert 8.9 <= doc["ratio"]["sup_ratio"] <= 9 + 1e-6


def test_evaluate_malformed(tmp_path, capsys):
    f = tmp_path / "bad.json"
    f.write_text('{"dimension": 2,\n "vertices": [[0, 0],\n [1, "a"]]}')
    code, _, err = run(capsys, "evaluate", str(f))
    assert code == 1
    assert "line 3" in err


def test_evaluate_missing_file(tmp_path, capsys):
    code, _, err = run(capsys, "evaluate", str(tmp_path / "nope.json"))
    assert code == 1 and err


def test_evaluate_csv_summary(gen, capsys):
    f = gen("cp4.json", "--kind", "cross-polytope", "--dim", "4")
    code, out, _ = run(capsys, "evaluate", str(f), "--format", "csv-summary", "--samples", "5000")
    header, row = out.strip().splitlines()
    assert header.startswith("d,length,mode,covers")
    assert row.split(",")[3] == "True"
    assert code == 0


def test_evaluate_exact_high_d_is_input_error(gen, capsys):
    f = gen("cp5.json", "--kind", "cross-polytope", "--dim", "5")
    code, _, err = run(capsys, "evaluate", str(f), "--mode", "exact-low-d")
    assert code == 1 and "d <= 3" in err


def test_evaluate_worker_count_irrelevant(gen, tmp_path, capsys):
    f = gen("cp6.json", "--kind", "cross-polytope", "--dim", "6")
    docs = []
    for w in ("1", "4"):
        out = tmp_path / f"r{w}.json"
        run(capsys, "evaluate", str(f), "--samples", "20000", "--workers", w, "--out", str(out))
        docs.append(out.read_bytes())
    assert docs[0] == docs[1]


# -- audit ----------------------------------------------------------------------------------


def test_audit_cross_polytope_32(gen, capsys):
    f = gen("cp32.json", "--kind", "cross-polytope", "--dim", "32")
    code, out, _ = run(capsys, "audit", str(f))
    doc = json.loads(out)
    assert code == 0
    assert doc["audit"]["m"] >= 16
    assert doc["audit"]["certified_lower_bound"] >= 9.6
    assert doc["corollary"]["branch"] == "reached-radius"


def test_audit_tiny_path(tmp_path, capsys):
    f = tmp_path / "tiny.json"
    f.write_text(json.dumps({"dimension": 16, "vertices": [[0] * 16, [0.1] + [0] * 15]}))
    code, out, _ = run(capsys, "audit", str(f))
    assert code == 0
    assert json.loads(out)["corollary"]["branch"] == "non-covering-certificate"


def test_audit_low_d_needs_tau(gen, capsys):
    f = gen("sp.json", "--kind", "log-spiral")
    code, _, err = run(capsys, "audit", str(f))
    assert code == 1
    assert "tau(d)" in err and "16 ln(d/2)" in err
    code, out, _ = run(capsys, "audit", str(f), "--tau", "0.5")
    doc = json.loads(out)
    assert code == 0 and doc["audit"]["tau"] == 0.5 and doc["audit"]["m"] >= 1
    assert doc["config"]["tau"] == 0.5


# -- verify / cap -----------------------------------------------------------------------------


def test_verify_single_suite(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "cap")
    doc = json.loads(out)
    assert code == 0
    assert [v["lemma_id"] for v in doc["verdicts"]] == ["cap"]


def test_verify_all_deterministic(tmp_path, capsys):
    outs = []
    for i in range(2):
        f = tmp_path / f"v{i}.json"
        code, _, _ = run(
            capsys, "verify", "--all", "--seed", "7", "--samples", "20000", "--trials", "5000", "--out", str(f)
        )
        assert code == 0
        outs.append(f.read_bytes())
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert {v["lemma_id"] for v in doc["verdicts"]} == {"cap", "point-visibility", "ball-containment", "confined-path"}
    assert all(v["violations"] == 0 for v in doc["verdicts"])
    assert doc["seed"] == 7


def test_verify_unknown_suite(capsys):
    code, _, _ = run(capsys, "verify", "--suite", "lemma5")
    assert code == 1


def test_cap_table(capsys):
    code, out, _ = run(capsys, "cap", "--dim", "3", "--eps", "0.5", "--format", "csv-summary")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "d,epsilon,exact,bound"
    d, eps, exact, bound = lines[1].split(",")
    assert float(exact) == pytest.approx(0.25) and float(bound) == pytest.approx(math.exp(-0.375))


def test_cap_json_default_grid(capsys):
    code, out, _ = run(capsys, "cap")
    rows = json.loads(out)["table"]
    assert code == 0 and len(rows) == 63 * 21
    assert all(r["exact"] <= r["bound"] for r in rows)
