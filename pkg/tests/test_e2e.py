import pytest
from click.testing import CliRunner

from deliberpy.cli import cli
from deliberpy.search.nbest import read_nbest
from deliberpy.synth.corpus import read_transcripts

SPEC = "seed: 5\nsizes: {lat: 20, grk: 10, han: 10}\n"
TRAIN = ["--preset", "tiny", "--set", "train.batch_size=2", "--set", "train.checkpoint_every=2"]

pytestmark = pytest.mark.slow


def _ok(runner, args):
    result = runner.invoke(cli, ["-q"] + args)
    assert result.exit_code == 0, result.output
    return result


def test_pipeline(tmp_path):
    runner = CliRunner()
    spec = tmp_path / "spec.yaml"
    spec.write_text(SPEC)
    data, fp, delib = tmp_path / "data", tmp_path / "fp", tmp_path / "delib"

    _ok(runner, ["gen-data", "--spec", str(spec), "-o", str(data)])
    _ok(runner, ["train-first-pass", "--data", str(data), "-o", str(fp), "--steps", "2"] + TRAIN)
    _ok(runner, ["train-first-pass", "--data", str(data), "-o", str(fp), "--steps", "3", "--resume"] + TRAIN)
    assert (fp / "ckpt-000003.bin").exists()
    assert len((fp / "loss.tsv").read_text().splitlines()) == 3

    _ok(runner, ["train-delib", "--first-pass-ckpt", str(fp), "--data", str(data), "-o", str(delib), "--steps", "2"] + TRAIN)

    nbest = tmp_path / "dev.nbest"
    _ok(runner, ["decode", "--ckpt", str(fp), "--data", str(data), "-o", str(nbest), "--beam", "3", "--workers", "2"])
    first_pass = read_nbest(nbest)
    assert len(first_pass) == 4
    assert all(1 <= len(n) <= 3 for n in first_pass.values())
    assert len(read_transcripts(tmp_path / "dev.top1.txt")) == 4

    rescored = tmp_path / "dev.rescored.nbest"
    _ok(runner, ["rescore", "--delib-ckpt", str(delib), "--nbest", str(nbest), "--data", str(data), "-o", str(rescored)])
    reranked = read_nbest(rescored)
    for utt_id, nbest_list in reranked.items():
        assert sorted(h.tokens for h in nbest_list.hyps) == sorted(h.tokens for h in first_pass[utt_id].hyps)
        assert all(h.delib_logp is not None for h in nbest_list.hyps)

    result = _ok(
        runner,
        ["evaluate", "--ref", str(data / "dev.txt"), "--hyp", str(tmp_path / "dev.top1.txt"),
         "--hyp", str(tmp_path / "dev.rescored.selected.txt"), "--data", str(data)],
    )
    assert "Avg. WER" in result.output


def test_rescoring_with_lambda_one_keeps_first_pass_order(tmp_path):
    runner = CliRunner()
    spec = tmp_path / "spec.yaml"
    spec.write_text(SPEC)
    data, fp, delib = tmp_path / "data", tmp_path / "fp", tmp_path / "delib"
    _ok(runner, ["gen-data", "--spec", str(spec), "-o", str(data)])
    _ok(runner, ["train-first-pass", "--data", str(data), "-o", str(fp), "--steps", "1"] + TRAIN)
    _ok(runner, ["train-delib", "--first-pass-ckpt", str(fp), "--data", str(data), "-o", str(delib), "--steps", "1"] + TRAIN)
    nbest = tmp_path / "dev.nbest"
    _ok(runner, ["decode", "--ckpt", str(fp), "--data", str(data), "-o", str(nbest), "--beam", "4"])
    out = tmp_path / "kept.nbest"
    _ok(
        runner,
        ["rescore", "--delib-ckpt", str(delib), "--nbest", str(nbest), "--data", str(data), "-o", str(out), "--lambda", "1"],
    )
    before, after = read_nbest(nbest), read_nbest(out)
    for utt_id in before:
        assert [h.tokens for h in after[utt_id].hyps] == [h.tokens for h in before[utt_id].hyps]


def test_experiment_summary(tmp_path):
    runner = CliRunner()
    spec = tmp_path / "spec.yaml"
    spec.write_text(SPEC)
    result = _ok(
        runner,
        ["experiment", "--seeds", "1-2", "-o", str(tmp_path / "exp"), "--spec", str(spec),
         "--steps", "1", "--delib-steps", "1"] + TRAIN,
    )
    assert [line.split("\t")[0] for line in result.output.strip().splitlines()] == ["1", "2"]
    summary = (tmp_path / "exp" / "experiment.tsv").read_text().splitlines()
    assert summary[0].startswith("seed\t")
    assert summary[-1].startswith("median\t")
