"""End-to-end command line behavior, run in-process through main()."""

from __future__ import annotations

import json
import os
from pathlib import Path

import pytest

from keyswap.cli import main

TWEETS = [
    {"text": "Morning walk along the river, the light was unreal today."},
    {"text": "RT @bot: this retweet must never reach the corpus"},
    {"text": "Reading on the balcony https://t.co/abc123 until the rain started."},
    {"text": "Small goals for the week: water the plants, answer letters."},
    {"text": "The cat has decided the keyboard is a bed."},
]


def write_jsonl(path: Path, records) -> None:
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")


@pytest.fixture()
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("KEYSWAP_OUT_DIR", raising=False)
    monkeypatch.delenv("KEYSWAP_THREADS", raising=False)
    return tmp_path


def ingest(workdir) -> Path:
    write_jsonl(workdir / "u.jsonl", TWEETS)
    assert main(["ingest", "u.jsonl", "-o", "u.txt"]) == 0
    return workdir / "u.txt"


def test_ingest_writes_corpus_and_meta(workdir, capsys):
    corpus = ingest(workdir)
    text = corpus.read_text(encoding="utf-8")
    assert "retweet" not in text
    assert "t co" not in text and "https" not in text
    assert text.startswith("morning walk along the river")
    meta = json.loads((workdir / "u.meta.json").read_text(encoding="utf-8"))
    assert meta["records"] == 5
    assert meta["usable_letters"] == len(text.replace(" ", ""))
    assert meta["policy"]["max_raw_chars"] == 1200
    assert "usable letters" in capsys.readouterr().out


def test_ingest_txt_input(workdir):
    (workdir / "u.txt.in").write_text("plain line one\nplain line two\n", encoding="utf-8")
    assert main(["ingest", "u.txt.in", "-o", "u.txt"]) == 0
    assert (workdir / "u.txt").read_text() == "plain line one plain line two"


def test_ingest_policy_flags(workdir):
    write_jsonl(workdir / "u.jsonl", TWEETS)
    assert main(["ingest", "u.jsonl", "-o", "kept.txt", "--keep-retweets", "--max-raw-chars", "60"]) == 0
    kept = (workdir / "kept.txt").read_text()
    assert kept.startswith("morning walk")
    assert len(kept) <= 60


def test_ingest_data_errors(workdir, capsys):
    assert main(["ingest", "missing.jsonl", "-o", "x.txt"]) == 2
    write_jsonl(workdir / "rt.jsonl", [{"text": "RT @a: gone"}])
    assert main(["ingest", "rt.jsonl", "-o", "x.txt"]) == 2
    (workdir / "bad.jsonl").write_text("not json\n", encoding="utf-8")
    assert main(["ingest", "bad.jsonl", "-o", "x.txt"]) == 2
    err = capsys.readouterr().err
    assert "bad.jsonl:1" in err


def test_ingest_rejects_symbol_only_corpus(workdir):
    write_jsonl(workdir / "sym.jsonl", [{"text": "12345 !!! ???"}])
    assert main(["ingest", "sym.jsonl", "-o", "x.txt"]) == 2


def optimize(workdir, *extra) -> Path:
    ingest(workdir)
    assert main(["optimize", "u.txt", "-o", "r.json", "--swaps", "1", *extra]) == 0
    return workdir / "r.json"


def test_optimize_writes_deterministic_result(workdir):
    result_path = optimize(workdir)
    first = result_path.read_bytes()
    data = json.loads(first)
    assert data["wall_time_s"] is None
    assert data["mode"] == "canonical"
    assert data["candidates"] == 325
    assert data["per_pct"] > 0
    assert main(["optimize", "u.txt", "-o", "r.json", "--swaps", "1"]) == 0
    assert result_path.read_bytes() == first


def test_optimize_cumulative_flag(workdir):
    ingest(workdir)
    assert main(["optimize", "u.txt", "-o", "c.json", "--swaps", "2", "--cumulative"]) == 0
    data = json.loads((workdir / "c.json").read_text())
    assert data["cumulative"] is True
    assert data["candidates"] == 1 + 325 + 44_850


def test_optimize_thread_flag_is_output_invariant(workdir):
    optimize(workdir)
    assert main(["optimize", "u.txt", "-o", "r3.json", "--swaps", "1", "--threads", "3"]) == 0
    assert (workdir / "r.json").read_bytes() == (workdir / "r3.json").read_bytes()


def test_optimize_usage_errors(workdir):
    ingest(workdir)
    # Triplet pairing is only defined for three swap pairs.
    assert main(["optimize", "u.txt", "-o", "x.json", "--swaps", "2", "--mode", "paper"]) == 1
    assert main(["optimize", "u.txt", "-o", "x.json", "--mode", "paper", "--cumulative"]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["optimize", "u.txt", "-o", "x.json", "--swaps", "7"])
    assert exc.value.code == 1


def test_optimize_data_errors(workdir, capsys):
    assert main(["optimize", "nope.txt", "-o", "x.json"]) == 2
    (workdir / "raw.txt").write_text("Not Normalized!", encoding="utf-8")
    assert main(["optimize", "raw.txt", "-o", "x.json"]) == 2
    assert "not a normalized corpus" in capsys.readouterr().err


def test_report_outputs(workdir, capsys):
    optimize(workdir)
    assert main(["report", "--result", "r.json", "--corpus", "u.txt", "--out-dir", "rep"]) == 0
    rep = workdir / "rep"
    # user id defaults to the corpus stem
    assert sorted(p.name for p in rep.iterdir()) == [
        "u.optimized.svg",
        "u.pairs.csv",
        "u.qwerty.svg",
        "u.report.json",
    ]
    report = json.loads((rep / "u.report.json").read_text())
    assert report["user_id"] == "u"
    assert report["per_pct"] > 0
    csv = (rep / "u.pairs.csv").read_text().splitlines()
    assert csv[0] == "pair,usage_pct,d_qwerty_cm,d_opt_cm,ratio"
    assert len(csv) <= 16
    out = capsys.readouterr().out
    assert "improvement" in out


def test_report_svg_dir_split(workdir):
    optimize(workdir)
    assert main([
        "report", "--result", "r.json", "--corpus", "u.txt",
        "--out-dir", "tables", "--svg-dir", "figures", "--user-id", "me",
    ]) == 0
    assert (workdir / "tables" / "me.report.json").exists()
    assert (workdir / "figures" / "me.qwerty.svg").exists()
    assert not (workdir / "tables" / "me.qwerty.svg").exists()


def test_report_rejects_tampered_result(workdir, capsys):
    result_path = optimize(workdir)
    data = json.loads(result_path.read_text())
    data["best_cost_mm"] *= 0.5
    result_path.write_text(json.dumps(data), encoding="utf-8")
    assert main(["report", "--result", "r.json", "--corpus", "u.txt", "--out-dir", "rep"]) == 2
    assert "does not verify" in capsys.readouterr().err


def test_report_rejects_wrong_corpus(workdir):
    optimize(workdir)
    (workdir / "other.txt").write_text("a completely different corpus", encoding="utf-8")
    assert main(["report", "--result", "r.json", "--corpus", "other.txt", "--out-dir", "rep"]) == 2


BATCH_TWEETS = {
    "alice": [
        {"text": "tea first then the long climb up the hill to the observatory"},
        {"text": "the market had one warm loaf left so the day counts as a win"},
    ],
    "bob": [
        {"text": "evening run along the canal, flat water, orange october sky"},
        {"text": "sorting old photographs from the trip made me want to go back"},
    ],
}


def write_batch_inputs(workdir, manifest_extra=None):
    users = []
    for uid, tweets in BATCH_TWEETS.items():
        write_jsonl(workdir / f"{uid}.jsonl", tweets)
        users.append({"id": uid, "corpus": f"{uid}.jsonl"})
    manifest = {"users": users, "search": {"n_swap_pairs": 1}}
    manifest.update(manifest_extra or {})
    (workdir / "manifest.json").write_text(json.dumps(manifest), encoding="utf-8")
    return workdir / "manifest.json"


def tree_bytes(root: Path) -> dict[str, bytes]:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def test_batch_full_tree(workdir):
    write_batch_inputs(workdir, {"out_dir": "batch_out"})
    assert main(["batch", "manifest.json"]) == 0
    out = workdir / "batch_out"
    for uid in BATCH_TWEETS:
        for name in (
            "corpus.txt",
            "corpus.meta.json",
            "result.json",
            "scatter.svg",
            f"{uid}.report.json",
            f"{uid}.pairs.csv",
            f"{uid}.qwerty.svg",
            f"{uid}.optimized.svg",
        ):
            assert (out / uid / name).is_file(), (uid, name)
    batch = json.loads((out / "batch.json").read_text())
    assert [u["user_id"] for u in batch["users"]] == list(BATCH_TWEETS)
    assert all(u["status"] == "ok" for u in batch["users"])
    assert batch["aggregate"]["n_users"] == 2
    assert (out / "aggregate.json").is_file()
    assert (out / "aggregate_panels.svg").is_file()


def test_batch_is_byte_identical_across_runs_and_threads(workdir):
    write_batch_inputs(workdir)
    assert main(["batch", "manifest.json", "--out-dir", "a"]) == 0
    assert main(["batch", "manifest.json", "--out-dir", "b", "--threads", "2"]) == 0
    assert tree_bytes(workdir / "a") == tree_bytes(workdir / "b")


def test_batch_out_dir_precedence(workdir, monkeypatch):
    write_batch_inputs(workdir, {"out_dir": "from_manifest"})
    monkeypatch.setenv("KEYSWAP_OUT_DIR", "from_env")
    assert main(["batch", "manifest.json"]) == 0
    assert (workdir / "from_env" / "batch.json").exists()
    assert not (workdir / "from_manifest").exists()
    assert main(["batch", "manifest.json", "--out-dir", "from_flag"]) == 0
    assert (workdir / "from_flag" / "batch.json").exists()


def test_batch_partial_failure(workdir, capsys):
    manifest_path = write_batch_inputs(workdir)
    manifest = json.loads(manifest_path.read_text())
    manifest["users"].append({"id": "ghost", "corpus": "missing.jsonl"})
    manifest_path.write_text(json.dumps(manifest), encoding="utf-8")
    assert main(["batch", "manifest.json", "--out-dir", "pb"]) == 3
    batch = json.loads((workdir / "pb" / "batch.json").read_text())
    statuses = {u["user_id"]: u["status"] for u in batch["users"]}
    assert statuses == {"alice": "ok", "bob": "ok", "ghost": "error"}
    assert "ghost: FAILED" in capsys.readouterr().err


def test_batch_every_user_failing(workdir):
    (workdir / "manifest.json").write_text(
        json.dumps({"users": [{"id": "ghost", "corpus": "missing.jsonl"}]}),
        encoding="utf-8",
    )
    assert main(["batch", "manifest.json", "--out-dir", "x"]) == 2


def test_batch_manifest_validation(workdir):
    (workdir / "manifest.json").write_text(json.dumps({"users": []}), encoding="utf-8")
    assert main(["batch", "manifest.json"]) == 2
    (workdir / "manifest.json").write_text(
        json.dumps({"users": [{"id": "a", "corpus": "x"}, {"id": "a", "corpus": "y"}]}),
        encoding="utf-8",
    )
    assert main(["batch", "manifest.json"]) == 2
    (workdir / "manifest.json").write_text(
        json.dumps({"users": [{"id": "../up", "corpus": "x"}]}), encoding="utf-8"
    )
    assert main(["batch", "manifest.json"]) == 2
    assert main(["batch", "nothere.json"]) == 2


def test_config_file_defaults(workdir):
    ingest(workdir)
    (workdir / "cfg.json").write_text(
        json.dumps({"search": {"n_swap_pairs": 1}, "top_pairs": 3}), encoding="utf-8"
    )
    assert main(["--config", "cfg.json", "optimize", "u.txt", "-o", "r.json"]) == 0
    assert json.loads((workdir / "r.json").read_text())["candidates"] == 325
    assert main(["--config", "cfg.json", "report", "--result", "r.json", "--corpus", "u.txt", "--out-dir", "rep"]) == 0
    csv = (workdir / "rep" / "u.pairs.csv").read_text().splitlines()
    assert len(csv) == 4  # header + top 3


def test_flag_overrides_config(workdir):
    ingest(workdir)
    (workdir / "cfg.json").write_text(json.dumps({"search": {"n_swap_pairs": 2}}), encoding="utf-8")
    assert main(["--config", "cfg.json", "optimize", "u.txt", "-o", "r.json", "--swaps", "1"]) == 0
    assert json.loads((workdir / "r.json").read_text())["candidates"] == 325


def test_threads_env_is_usage_checked(workdir, monkeypatch):
    ingest(workdir)
    monkeypatch.setenv("KEYSWAP_THREADS", "lots")
    assert main(["optimize", "u.txt", "-o", "x.json", "--swaps", "1"]) == 1


def test_unknown_command_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_missing_required_flag_is_usage_error(workdir):
    with pytest.raises(SystemExit) as exc:
        main(["ingest", "u.jsonl"])
    assert exc.value.code == 1


def test_geometry_flag(workdir):
    from keyswap.geometry import DEFAULT_SPEC

    ingest(workdir)
    spec = DEFAULT_SPEC.scaled(2.0).to_json_dict()
    (workdir / "geo.json").write_text(json.dumps(spec), encoding="utf-8")
    assert main(["optimize", "u.txt", "-o", "big.json", "--swaps", "1", "--geometry", "geo.json"]) == 0
    assert main(["optimize", "u.txt", "-o", "std.json", "--swaps", "1"]) == 0
    big = json.loads((workdir / "big.json").read_text())
    std = json.loads((workdir / "std.json").read_text())
    # Uniform scaling doubles every distance but moves no decisions.
    assert big["swaps"] == std["swaps"]
    assert big["qwerty_cost_mm"] == pytest.approx(2.0 * std["qwerty_cost_mm"], rel=1e-12)
    assert big["per_pct"] == pytest.approx(std["per_pct"], rel=1e-9)
