"""End-to-end CLI behavior: exit codes, subcommand wiring, config handling."""

from __future__ import annotations

from pathlib import Path

import pytest

from anticipate import golden
from anticipate.cli import cli_dispatch
from anticipate.eventio import read_events, write_events
from anticipate.events import EventSequence
from anticipate.midi import parse_midi, write_midi
from anticipate.tokenizer import read_tokens

from conftest import random_events


def run(*argv) -> int:
    return cli_dispatch(list(argv))


@pytest.fixture
def twinkle_file(tmp_path) -> Path:
    path = tmp_path / "twinkle.txt"
    with open(path, "w") as f:
        write_events(f, [golden.twinkle_events()])
    return path


@pytest.fixture
def corpus_file(tmp_path, rng) -> Path:
    path = tmp_path / "corpus.txt"
    seqs = [
        random_events(rng, 60, max_gap=25, n_instruments=3, start_at_zero=True)
        for _ in range(6)
    ]
    with open(path, "w") as f:
        write_events(f, seqs)
    return path


class TestExitCodes:
    def test_no_arguments_usage(self, capsys):
        assert run() == 1

    def test_unknown_subcommand(self):
        assert run("frobnicate") == 1

    def test_golden_passes(self, capsys):
        assert run("golden") == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out and "PASS" in out

    def test_data_error_is_two(self, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("#codec=arrival vocab=55028\n1 2\n")
        assert run("detokenize", str(bad), str(tmp_path / "out.txt")) == 2

    def test_help_is_success(self):
        assert run("--help") == 0


class TestTokenizeDetokenize:
    def test_twinkle_matches_reference_tokens(self, twinkle_file, tmp_path, capsys):
        assert run("tokenize", "--codec", "arrival", str(twinkle_file), "-") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert [int(t) for t in lines[-1].split()] == golden.TWINKLE_ARRIVAL_TOKENS

    def test_interarrival_reference(self, twinkle_file, capsys):
        assert run("tokenize", "--codec", "interarrival", str(twinkle_file), "-") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert [int(t) for t in lines[-1].split()] == golden.TWINKLE_INTERARRIVAL_TOKENS

    def test_roundtrip_through_files(self, corpus_file, tmp_path):
        tokens = tmp_path / "tokens.txt"
        back = tmp_path / "back.txt"
        assert run("tokenize", "--codec", "arrival", str(corpus_file), str(tokens)) == 0
        assert run("detokenize", str(tokens), str(back)) == 0
        with open(corpus_file) as f:
            original = read_events(f)
        with open(back) as f:
            restored = read_events(f)
        assert restored == original

    def test_out_of_range_times_fail(self, tmp_path):
        path = tmp_path / "long.txt"
        path.write_text("20000 10 60\n")
        assert run("tokenize", "--codec", "arrival", str(path), "-") == 2

    def test_relativize_rescues_late_start(self, tmp_path, capsys):
        path = tmp_path / "late.txt"
        path.write_text("20000 10 60\n20010 10 61\n")
        assert run("tokenize", "--codec", "arrival", "--relativize", str(path), "-") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert [int(t) for t in lines[-1].split()][4] == 0

    def test_raw_flag_omits_preamble(self, twinkle_file, capsys):
        assert run("tokenize", "--codec", "arrival", "--raw", str(twinkle_file), "-") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert [int(t) for t in lines[-1].split()] == golden.TWINKLE_ARRIVAL_TOKENS[4:]

    def test_codec_mismatch_on_detokenize(self, twinkle_file, tmp_path):
        tokens = tmp_path / "t.tok"
        assert run("tokenize", "--codec", "arrival", str(twinkle_file), str(tokens)) == 0
        assert run("detokenize", "--codec", "interarrival", str(tokens), "-") == 2

    def test_densify_rejects_controls(self, tmp_path):
        path = tmp_path / "mix.txt"
        path.write_text("100 10 60\nC 700 10 48\n")
        assert run("densify", str(path), "-") == 2


class TestDensifyInterleave:
    def test_densify_inserts_rests(self, tmp_path, capsys):
        path = tmp_path / "sparse.txt"
        path.write_text("100 10 60\n200 10 60\n500 10 60\n")
        assert run("densify", "--target-density", "1.0", str(path), "-") == 0
        out = capsys.readouterr().out
        assert "300 0 R" in out and "400 0 R" in out

    def test_interleave_tagged_controls(self, tmp_path, capsys):
        path = tmp_path / "mix.txt"
        path.write_text("100 10 60\n300 10 60\n500 10 60\nC 700 10 48\n")
        assert run("interleave", "--delta", "5.0", str(path), "-") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines == ["100 10 60", "300 10 60", "C 700 10 48", "500 10 60"]


class TestPipeline:
    def test_ingest_augment_train_evaluate_sample(self, tmp_path, rng):
        midi_dir = tmp_path / "midi"
        midi_dir.mkdir()
        for i in range(6):
            seq = random_events(rng, 120, max_gap=25, avoid_note_overlap=True)
            (midi_dir / f"s{i}.mid").write_bytes(write_midi(seq))
        out = tmp_path / "data"
        assert run("ingest", str(midi_dir), str(out)) == 0
        assert (out / "manifest.tsv").exists()

        merged = tmp_path / "all.txt"
        text = "\n\n".join(
            (out / f"{s}.txt").read_text().strip()
            for s in ("train", "valid", "test")
            if (out / f"{s}.txt").read_text().strip()
        )
        merged.write_text(text + "\n")

        tokens = tmp_path / "aug.tok"
        assert run("augment", "--factor", "10", "--seed", "1", str(merged), str(tokens)) == 0
        assert Path(str(tokens) + ".labels").exists()

        model = tmp_path / "model.pkl"
        assert run("train-ngram", "--order", "2", "--alpha", "0.01", str(tokens), str(model)) == 0

        report = tmp_path / "report.txt"
        assert run("evaluate", "--model", str(model), str(tokens), "--report", str(report)) == 0
        assert "bits_per_second=" in report.read_text()

        controls = tmp_path / "controls.txt"
        with open(controls, "w") as f:
            write_events(f, [EventSequence(list(golden.twinkle_events())[:4])])
        sample_out = tmp_path / "gen.txt"
        assert (
            run(
                "sample",
                "--model", str(model),
                "--controls", str(controls),
                "--mode", "anticipatory",
                "--max-tokens", "120",
                "--seed", "3",
                str(sample_out),
            )
            == 0
        )
        with open(sample_out) as f:
            generated = read_events(f, check=False)
        assert len(generated) == 1
        assert len(generated[0].controls()) == 4

        midi_out = tmp_path / "gen.mid"
        assert (
            run(
                "sample",
                "--model", str(model),
                "--controls", str(controls),
                "--max-tokens", "120",
                "--seed", "3",
                "--out", "midi",
                str(midi_out),
            )
            == 0
        )
        parse_midi(midi_out.read_bytes())  # must be a valid file

    def test_idempotent_given_seed(self, corpus_file, tmp_path):
        a, b = tmp_path / "a.tok", tmp_path / "b.tok"
        for target in (a, b):
            assert run("augment", "--factor", "10", "--seed", "9", str(corpus_file), str(target)) == 0
        assert a.read_bytes() == b.read_bytes()


class TestConfigFile:
    def test_config_supplies_defaults(self, tmp_path, corpus_file):
        config = tmp_path / "run.conf"
        config.write_text("factor=10\nseed=4\n")
        out = tmp_path / "out.tok"
        assert run("augment", "--config", str(config), str(corpus_file), str(out)) == 0
        explicit = tmp_path / "explicit.tok"
        assert run(
            "augment", "--factor", "10", "--seed", "4", str(corpus_file), str(explicit)
        ) == 0
        assert out.read_bytes() == explicit.read_bytes()

    def test_flags_override_config(self, tmp_path, corpus_file):
        config = tmp_path / "run.conf"
        config.write_text("seed=4\n")
        a = tmp_path / "a.tok"
        b = tmp_path / "b.tok"
        assert run("augment", "--config", str(config), "--seed", "5", "--factor", "10",
                   str(corpus_file), str(a)) == 0
        assert run("augment", "--factor", "10", "--seed", "5", str(corpus_file), str(b)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_unknown_key_rejected(self, tmp_path, corpus_file):
        config = tmp_path / "run.conf"
        config.write_text("volume=11\n")
        assert run("augment", "--config", str(config), str(corpus_file), "-") == 1

    def test_seed_env_fallback(self, tmp_path, corpus_file, monkeypatch):
        a, b = tmp_path / "a.tok", tmp_path / "b.tok"
        monkeypatch.setenv("ANTICIPATE_SEED", "77")
        assert run("augment", "--factor", "10", str(corpus_file), str(a)) == 0
        monkeypatch.delenv("ANTICIPATE_SEED")
        assert run("augment", "--factor", "10", "--seed", "77", str(corpus_file), str(b)) == 0
        assert a.read_bytes() == b.read_bytes()


class TestTokenizePack:
    def test_pack_emits_fixed_length_examples(self, tmp_path, rng):
        path = tmp_path / "big.txt"
        seqs = [
            random_events(rng, 400, max_gap=20, start_at_zero=True) for _ in range(3)
        ]
        with open(path, "w") as f:
            write_events(f, seqs)
        out = tmp_path / "packed.tok"
        assert run("tokenize", "--codec", "arrival", "--pack", str(path), str(out)) == 0
        with open(out) as f:
            codec, rows = read_tokens(f)
        assert codec == "arrival"
        assert rows and all(len(row) == 1024 for row in rows)
