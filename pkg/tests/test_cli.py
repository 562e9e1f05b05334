"""CLI tests. Each invocation goes through main(argv) and checks exit codes."""

from __future__ import annotations

import json
import re

import numpy as np
import pytest

from countryrank.cli import main
from countryrank.imaging import Panorama, encode_png
from countryrank.profiles_io import load_color_profiles, load_language_profiles, load_weights


def subset_manifest(corpus, tmp_path, count, stride=5, name="dev.jsonl"):
    """Copy every stride-th query manifest line with absolute image paths."""
    lines = corpus.query_manifest.read_text(encoding="utf-8").splitlines()
    out = []
    for line in lines[::stride][:count]:
        doc = json.loads(line)
        doc["path"] = str((corpus.query_manifest.parent / doc["path"]).resolve())
        out.append(json.dumps(doc))
    path = tmp_path / name
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path


def first_query(corpus):
    doc = json.loads(corpus.query_manifest.read_text(encoding="utf-8").splitlines()[0])
    path = (corpus.query_manifest.parent / doc["path"]).resolve()
    return path, doc["truth"], doc.get("north_offset_deg")


def gray_png(tmp_path, name="gray.png"):
    pano = Panorama(pixels=np.full((256, 512, 3), 128, dtype=np.uint8))
    path = tmp_path / name
    path.write_bytes(encode_png(pano))
    return path


def test_no_arguments_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_guess_missing_path_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["guess"])
    assert exc.value.code == 2


def test_guess_happy_path(full_corpus, capsys):
    image, truth, offset = first_query(full_corpus)
    argv = ["--config", str(full_corpus.config), "guess", str(image), "--top", "3"]
    if offset is not None:
        argv += ["--north-offset", str(offset)]
    assert main(argv) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3
    assert re.match(r"\s*1\.\s+[A-Z]{2}\s+0\.\d{6}$", lines[0])
    assert lines[0].split()[1] == truth


def test_guess_explain_shows_modules(full_corpus, capsys):
    image, truth, offset = first_query(full_corpus)
    argv = ["--config", str(full_corpus.config), "guess", str(image), "--explain"]
    if offset is not None:
        argv += ["--north-offset", str(offset)]
    assert main(argv) == 0
    out = capsys.readouterr().out
    assert "weights used:" in out
    assert "[color]" in out
    assert "[solar]" in out


def test_guess_weights_override(full_corpus, tmp_path, capsys):
    weights = tmp_path / "weights.json"
    weights.write_text(
        json.dumps({"color": 3.0, "solar": 1.0, "textlang": 1.0, "caption": 1.0, "object": 1.0, "plate": 1.0}),
        encoding="utf-8",
    )
    image, _, offset = first_query(full_corpus)
    argv = [
        "--config", str(full_corpus.config),
        "guess", str(image), "--weights", str(weights), "--explain",
    ]
    if offset is not None:
        argv += ["--north-offset", str(offset)]
    assert main(argv) == 0
    assert "color: 0.3750" in capsys.readouterr().out


def test_guess_missing_config_exits_6(full_corpus, tmp_path):
    image = gray_png(tmp_path)
    assert main(["--config", str(tmp_path / "absent.json"), "guess", str(image)]) == 6


def test_guess_unreadable_image_exits_3(full_corpus, tmp_path, capsys):
    rc = main(["--config", str(full_corpus.config), "guess", str(tmp_path / "absent.png")])
    assert rc == 3
    assert "cannot read" in capsys.readouterr().err


def test_guess_corrupt_image_exits_3(full_corpus, tmp_path, capsys):
    bad = tmp_path / "bad.png"
    bad.write_bytes(b"not a png at all")
    rc = main(["--config", str(full_corpus.config), "guess", str(bad)])
    assert rc == 3
    assert capsys.readouterr().err.startswith("error:")


def test_profiles_build_language(tmp_path, capsys):
    corpus_dir = tmp_path / "corpus"
    corpus_dir.mkdir()
    (corpus_dir / "en.txt").write_text(
        "the quick brown fox jumps over the lazy dog and runs away " * 5, encoding="utf-8"
    )
    (corpus_dir / "de.txt").write_text(
        "der schnelle braune fuchs springt und rennt nicht weg " * 5, encoding="utf-8"
    )
    out = tmp_path / "lang.json"
    rc = main(["profiles", "build", "--kind", "language", "--corpus", str(corpus_dir), "--out", str(out)])
    assert rc == 0
    assert "wrote 2 language profiles" in capsys.readouterr().out
    assert set(load_language_profiles(out).profiles) == {"de", "en"}


def test_profiles_build_language_without_corpus_exits_6(tmp_path):
    out = tmp_path / "lang.json"
    assert main(["profiles", "build", "--kind", "language", "--out", str(out)]) == 6


def test_profiles_build_color(full_corpus, tmp_path, capsys):
    out = tmp_path / "colors.json"
    rc = main([
        "--config", str(full_corpus.config),
        "profiles", "build", "--kind", "color",
        "--manifest", str(full_corpus.train_manifest), "--out", str(out),
    ])
    assert rc == 0
    assert "wrote 10 color profiles" in capsys.readouterr().out
    assert len(load_color_profiles(out)) == 10


def test_profiles_build_caption_without_provider_exits_4(tmp_path):
    image = gray_png(tmp_path)
    manifest = tmp_path / "m.jsonl"
    manifest.write_text(json.dumps({"path": str(image), "truth": "DE"}) + "\n", encoding="utf-8")
    out = tmp_path / "captions.json"
    rc = main(["profiles", "build", "--kind", "caption", "--manifest", str(manifest), "--out", str(out)])
    assert rc == 4
    assert not out.exists()


def test_profiles_build_caption_without_manifest_exits_6(tmp_path):
    assert main(["profiles", "build", "--kind", "caption", "--out", str(tmp_path / "c.json")]) == 6


def test_eval_run_json(full_corpus, tmp_path, capsys):
    manifest = subset_manifest(full_corpus, tmp_path, 10)
    rc = main(["--config", str(full_corpus.config), "eval", "run", "--manifest", str(manifest), "--json"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert set(doc) == {"metrics", "items", "failures"}
    assert doc["metrics"]["sample_count"] == 10
    assert doc["failures"] == []
    for item in doc["items"]:
        assert item["rank"] >= 1
        assert re.fullmatch(r"[0-9a-f]{64}", item["report_digest"])


def test_eval_run_text(full_corpus, tmp_path, capsys):
    manifest = subset_manifest(full_corpus, tmp_path, 4)
    rc = main(["--config", str(full_corpus.config), "eval", "run", "--manifest", str(manifest)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "mean rank:" in out
    assert "top-1:" in out


def test_eval_run_bad_manifest_exits_7(full_corpus, tmp_path):
    manifest = tmp_path / "broken.jsonl"
    manifest.write_text("{not json\n", encoding="utf-8")
    rc = main(["--config", str(full_corpus.config), "eval", "run", "--manifest", str(manifest)])
    assert rc == 7


def test_eval_ablate_text(full_corpus, tmp_path, capsys):
    manifest = subset_manifest(full_corpus, tmp_path, 5)
    rc = main([
        "--config", str(full_corpus.config),
        "eval", "ablate", "--manifest", str(manifest), "--order", "color,solar",
    ])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("full system:")
    assert lines[1].startswith("without color:")
    assert lines[2].startswith("without color, solar:")


def test_eval_ablate_json(full_corpus, tmp_path, capsys):
    manifest = subset_manifest(full_corpus, tmp_path, 5)
    rc = main([
        "--config", str(full_corpus.config),
        "eval", "ablate", "--manifest", str(manifest), "--order", "color", "--json",
    ])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["rows"][0]["label"] == "full system"
    assert doc["rows"][1]["removed"] == ["color"]
    assert "color" not in doc["rows"][1]["active"]


def test_eval_ablate_unknown_module_exits_7(full_corpus, tmp_path):
    manifest = subset_manifest(full_corpus, tmp_path, 3)
    rc = main([
        "--config", str(full_corpus.config),
        "eval", "ablate", "--manifest", str(manifest), "--order", "warp",
    ])
    assert rc == 7


def test_weights_optimize(full_corpus, tmp_path, capsys):
    manifest = subset_manifest(full_corpus, tmp_path, 10)
    out = tmp_path / "fitted.json"
    rc = main([
        "--config", str(full_corpus.config),
        "weights", "optimize", "--manifest", str(manifest), "--out", str(out),
    ])
    assert rc == 0
    text = capsys.readouterr().out
    assert "wrote weights to" in text
    assert "mean rank on development set:" in text
    fitted = load_weights(out)
    assert abs(sum(fitted.weights.values()) - 1.0) < 1e-9
