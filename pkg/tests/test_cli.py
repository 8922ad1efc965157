import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from stegolm.cli import main

CORPUS = (
    "the cat sat on the mat .\n"
    "a dog ran in the park .\n"
    "the dog saw a cat today .\n"
    "@sam look http://t.co/abc123 !\n"
) * 60


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cliws")
    (root / "corpus.txt").write_text(CORPUS, encoding="utf-8")
    assert main([
        "prep", "--in", str(root / "corpus.txt"),
        "--out-tokens", str(root / "tokens.txt"),
        "--out-vocab", str(root / "vocab.tsv"),
    ]) == 0
    assert main([
        "train", "--backend", "ngram", "--tokens", str(root / "tokens.txt"),
        "--vocab", str(root / "vocab.tsv"), "--out", str(root / "model.slm"),
        "--order", "2", "--add-k", "0.1",
    ]) == 0
    assert main([
        "keygen", "--vocab", str(root / "vocab.tsv"), "--block-bits", "2",
        "--common", "3", "--seed", "7", "--out", str(root / "key.sk"),
    ]) == 0
    return root


def test_prep_outputs(workspace):
    vocab_text = (workspace / "vocab.tsv").read_text()
    assert vocab_text.startswith("STEGOVOCAB v1\n")
    tokens = (workspace / "tokens.txt").read_text().splitlines()
    assert "<user>" in tokens and "<url>" in tokens and "<eos>" in tokens


def test_key_file_layout(workspace):
    lines = (workspace / "key.sk").read_text().splitlines()
    assert lines[0] == "STEGOKEY v1"
    assert lines[1] == "block_bits: 2"


def test_encode_decode_roundtrip(workspace, tmp_path):
    payload = bytes(range(64))
    (tmp_path / "payload.bin").write_bytes(payload)
    assert main([
        "encode", "--vocab", str(workspace / "vocab.tsv"),
        "--key", str(workspace / "key.sk"), "--model", str(workspace / "model.slm"),
        "--in", str(tmp_path / "payload.bin"), "--out", str(tmp_path / "steg.txt"),
        "--emit-tokens", str(tmp_path / "steg.tok"),
        "--mode", "sample", "--seed", "3", "--framing", "length",
    ]) == 0
    assert main([
        "decode", "--vocab", str(workspace / "vocab.tsv"),
        "--key", str(workspace / "key.sk"), "--tokens", str(tmp_path / "steg.tok"),
        "--framing", "length", "--out", str(tmp_path / "recovered.bin"),
    ]) == 0
    assert (tmp_path / "recovered.bin").read_bytes() == payload
    rendered = (tmp_path / "steg.txt").read_text()
    assert rendered.strip()


def test_decode_needs_no_model_flag(workspace):
    # the decode subcommand has no --model flag at all
    with pytest.raises(SystemExit):
        main([
            "decode", "--vocab", str(workspace / "vocab.tsv"),
            "--key", str(workspace / "key.sk"), "--tokens", "x",
            "--model", "whatever",
        ])


def test_encode_is_seed_reproducible(workspace, tmp_path):
    args = [
        "encode", "--vocab", str(workspace / "vocab.tsv"),
        "--key", str(workspace / "key.sk"), "--model", str(workspace / "model.slm"),
        "--mode", "sample", "--seed", "11", "--framing", "length",
    ]
    payload = tmp_path / "p.bin"
    payload.write_bytes(b"reproducible payload")
    for name in ("a", "b"):
        assert main(args + [
            "--in", str(payload),
            "--out", str(tmp_path / f"{name}.txt"),
            "--emit-tokens", str(tmp_path / f"{name}.tok"),
        ]) == 0
    assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()
    assert (tmp_path / "a.tok").read_bytes() == (tmp_path / "b.tok").read_bytes()


def test_raw_framing_emits_bit_string(workspace, tmp_path):
    payload = tmp_path / "p.bin"
    payload.write_bytes(b"\xa5")
    assert main([
        "encode", "--vocab", str(workspace / "vocab.tsv"),
        "--key", str(workspace / "key.sk"), "--model", str(workspace / "model.slm"),
        "--in", str(payload), "--out", str(tmp_path / "s.txt"),
        "--emit-tokens", str(tmp_path / "s.tok"), "--framing", "raw",
        "--mode", "greedy",
    ]) == 0
    assert main([
        "decode", "--vocab", str(workspace / "vocab.tsv"),
        "--key", str(workspace / "key.sk"), "--tokens", str(tmp_path / "s.tok"),
        "--framing", "raw", "--out", str(tmp_path / "bits.txt"),
    ]) == 0
    assert (tmp_path / "bits.txt").read_text().strip() == "10100101"


def test_decode_from_rendered_text(workspace, tmp_path):
    payload = tmp_path / "p.bin"
    payload.write_bytes(b"ok")
    assert main([
        "encode", "--vocab", str(workspace / "vocab.tsv"),
        "--key", str(workspace / "key.sk"), "--model", str(workspace / "model.slm"),
        "--in", str(payload), "--out", str(tmp_path / "s.txt"),
        "--mode", "sample", "--seed", "2", "--framing", "length",
    ]) == 0
    assert main([
        "decode", "--vocab", str(workspace / "vocab.tsv"),
        "--key", str(workspace / "key.sk"), "--text", str(tmp_path / "s.txt"),
        "--framing", "length", "--out", str(tmp_path / "r.bin"),
    ]) == 0
    assert (tmp_path / "r.bin").read_bytes() == b"ok"


def test_eval_capacity_line(capsys):
    assert main(["eval", "--capacity", "--block-bits", "2"]) == 0
    out = capsys.readouterr().out
    assert "capacity: 2.000 bits/word" in out


def test_eval_reports_and_json(workspace, tmp_path, capsys):
    json_path = tmp_path / "report.json"
    assert main([
        "eval", "--vocab", str(workspace / "vocab.tsv"),
        "--model", str(workspace / "model.slm"), "--key", str(workspace / "key.sk"),
        "--tokens", str(workspace / "tokens.txt"),
        "--ppl", "--stego-ppl", "--capacity", "--block-bits", "1",
        "--common-fraction", "0.35", "--json", str(json_path),
    ]) == 0
    out = capsys.readouterr().out
    assert "[perplexity]" in out and "[stego_perplexity]" in out
    assert "capacity: 0.650 bits/word" in out
    doc = json.loads(json_path.read_text())
    assert set(doc) == {"perplexity", "stego_perplexity", "capacity"}
    assert doc["stego_perplexity"]["perplexity"] >= doc["perplexity"]["perplexity"]


def test_eval_capacity_empirical(workspace, tmp_path, capsys):
    payload = tmp_path / "p.bin"
    payload.write_bytes(b"measure me")
    assert main([
        "encode", "--vocab", str(workspace / "vocab.tsv"),
        "--key", str(workspace / "key.sk"), "--model", str(workspace / "model.slm"),
        "--in", str(payload), "--out", str(tmp_path / "s.txt"),
        "--emit-tokens", str(tmp_path / "s.tok"), "--seed", "4",
    ]) == 0
    assert main([
        "eval", "--vocab", str(workspace / "vocab.tsv"),
        "--key", str(workspace / "key.sk"), "--tokens", str(tmp_path / "s.tok"),
        "--capacity-empirical",
    ]) == 0
    assert "carrier_count" in capsys.readouterr().out


def test_mismatched_key_model_fails_with_error_class(workspace, tmp_path, capsys):
    other = tmp_path / "other.txt"
    other.write_text("completely different words here\n" * 50, encoding="utf-8")
    assert main([
        "prep", "--in", str(other), "--out-vocab", str(tmp_path / "other_vocab.tsv"),
        "--out-tokens", str(tmp_path / "other_tokens.txt"),
    ]) == 0
    code = main([
        "keygen", "--vocab", str(tmp_path / "other_vocab.tsv"), "--block-bits", "1",
        "--seed", "1", "--out", str(tmp_path / "other_key.sk"),
    ])
    assert code == 0
    capsys.readouterr()
    code = main([
        "encode", "--vocab", str(workspace / "vocab.tsv"),
        "--key", str(tmp_path / "other_key.sk"),
        "--model", str(workspace / "model.slm"),
        "--in", str(tmp_path / "other.txt"), "--out", "-",
    ])
    assert code == 1
    err = capsys.readouterr().err
    assert err.startswith("error: VocabMismatchError:")


def test_roundtrip_subcommand(capsys):
    assert main(["roundtrip", "--trials", "8", "--seed", "1"]) == 0
    assert "8/8 successes" in capsys.readouterr().out


def test_lstm_training_via_cli(workspace, tmp_path):
    assert main([
        "train", "--backend", "lstm", "--tokens", str(workspace / "tokens.txt"),
        "--vocab", str(workspace / "vocab.tsv"), "--out", str(tmp_path / "lstm.slm"),
        "--units", "12", "--embed-dim", "8", "--unroll", "8", "--batch-size", "4",
        "--epochs", "1", "--seed", "3",
    ]) == 0
    data = (tmp_path / "lstm.slm").read_bytes()
    assert data.startswith(b"STEGOLM v1\nbackend: lstm\n")


def test_stdin_stdout_piping(workspace, tmp_path):
    # module invocation so the test works without the console script on PATH
    encode = subprocess.run(
        [sys.executable, "-m", "stegolm.cli", "encode",
         "--vocab", str(workspace / "vocab.tsv"), "--key", str(workspace / "key.sk"),
         "--model", str(workspace / "model.slm"), "--seed", "5",
         "--emit-tokens", str(tmp_path / "pipe.tok")],
        input=b"piped-bytes", capture_output=True, check=True,
    )
    assert encode.stdout.decode().strip()
    decode = subprocess.run(
        [sys.executable, "-m", "stegolm.cli", "decode",
         "--vocab", str(workspace / "vocab.tsv"), "--key", str(workspace / "key.sk"),
         "--tokens", str(tmp_path / "pipe.tok")],
        capture_output=True, check=True,
    )
    assert decode.stdout == b"piped-bytes"
