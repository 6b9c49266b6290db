import json
import time

from pblr.cli import build_parser, main


def run(args):
    return main([str(a) for a in args])


def test_fig_a_writes_files(tmp_path):
    assert run(["fig-a", "--seed", 3, "--out", tmp_path,
                "--grid-size", 40, "--degrees", 1, 2]) == 0
    fig = (tmp_path / "fig_a.csv").read_text(encoding="utf-8")
    lines = fig.strip().split("\n")
    meta = [l for l in lines if l.startswith("# ")]
    assert any(l.startswith("# seed = 3") for l in meta)
    assert any(l.startswith("# tool_version = ") for l in meta)
    header_idx = len(meta)
    assert lines[header_idx] == "degree,x,mean_prediction"
    assert len(lines) - header_idx - 1 == 2 * 40
    train_lines = (tmp_path / "train.csv").read_text(
        encoding="utf-8").strip().split("\n")
    train_meta = [l for l in train_lines if l.startswith("# ")]
    assert any(l.startswith("# tool_version = ") for l in train_meta)
    assert train_lines[len(train_meta)] == "x_0,y"
    assert len(train_lines) - len(train_meta) == 16


def test_rerun_reproduces_identical_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run(["fig-b", "--seed", 5, "--out", out]) == 0
    assert (a / "fig_b.csv").read_bytes() == (b / "fig_b.csv").read_bytes()


def test_fig_b_columns(tmp_path):
    assert run(["fig-b", "--seed", 1, "--out", tmp_path]) == 0
    lines = (tmp_path / "fig_b.csv").read_text(encoding="utf-8").strip().split("\n")
    header = next(l for l in lines if not l.startswith("#"))
    assert header == "degree,neg_log_evidence,gibbs_emp_risk_total,kl,test_risk"
    data = [l for l in lines if not l.startswith("#")][1:]
    assert len(data) == 7
    for line in data:
        deg, nle, gibbs, kl, _ = (float(v) for v in line.split(","))
        assert abs(nle - (gibbs + kl)) <= 1e-8 * max(1.0, abs(nle))


def test_fig_b_seeds_mode(tmp_path):
    assert run(["fig-b", "--seed", 0, "--seeds", 3, "--out", tmp_path]) == 0
    lines = (tmp_path / "fig_b_selection.csv").read_text(
        encoding="utf-8").strip().split("\n")
    header = next(l for l in lines if not l.startswith("#"))
    assert header == "degree,wins"
    wins = sum(int(l.split(",")[1]) for l in lines
               if not l.startswith("#") and l != header)
    assert wins == 3


def test_invalid_degree_exits_nonzero(tmp_path, capsys):
    assert run(["fig-a", "--out", tmp_path, "--degrees", 0]) == 1
    assert "degrees" in capsys.readouterr().err


def test_fig_c_quick(tmp_path):
    assert run(["fig-c", "--seed", 2, "--out", tmp_path, "--n-grid", 10, 100,
                "--mc-weights", 300, "--mc-gen", 2000]) == 0
    lines = (tmp_path / "fig_c.csv").read_text(encoding="utf-8").strip().split("\n")
    meta = {l.split(" = ")[0][2:]: l.split(" = ")[1]
            for l in lines if l.startswith("# ")}
    assert float(meta["c"]) == 0.005
    assert 0.2795 <= float(meta["s2"]) <= 0.2810
    assert meta["mc_weights"] == "300"
    header = next(l for l in lines if not l.startswith("#"))
    assert header.split(",") == ["n", "emp_gibbs_nll", "gen_gibbs_nll",
                                 "bound_subgamma", "bound_catoni_cropped",
                                 "bound_alquier_sqrtn_cropped",
                                 "bound_alquier_n_cropped"]


def test_validate_smoke_run_is_fast(tmp_path):
    start = time.monotonic()
    code = run(["validate", "--seed", 4, "--out", tmp_path, "--trials", 1,
                "--mc-weights", 400, "--mc-test", 200, "--mgf-m", 10000])
    elapsed = time.monotonic() - start
    assert code == 0
    assert elapsed < 5.0
    payload = json.loads((tmp_path / "coverage.json").read_text(encoding="utf-8"))
    assert payload["config"]["seed"] == 4
    assert payload["config"]["trials"] == 1
    assert {f["family"] for f in payload["families"]} == \
        {"subgamma", "catoni", "alquier_sqrtn"}
    mgf_lines = (tmp_path / "mgf.csv").read_text(encoding="utf-8").strip().split("\n")
    assert "lambda,psi_hat,envelope,band" in mgf_lines


def test_seed_env_fallback(monkeypatch):
    monkeypatch.setenv("PBL_SEED", "99")
    args = build_parser().parse_args(["fig-a"])
    assert args.seed == 99
    monkeypatch.delenv("PBL_SEED")
    args = build_parser().parse_args(["fig-a"])
    assert args.seed != 99


def test_explicit_seed_overrides_env(monkeypatch):
    monkeypatch.setenv("PBL_SEED", "99")
    args = build_parser().parse_args(["fig-a", "--seed", "5"])
    assert args.seed == 5
