import pytest
import yaml
from click.testing import CliRunner

from deliberpy import __version__
from deliberpy.cli import cli
from deliberpy.core.config import Config
from deliberpy.core.handlers import with_first_pass_geometry
from deliberpy.evaluation import count_params
from deliberpy.utils.file_utils import directory_checksums

REF = "lat-00000\tlat\tabc de fg\nlat-00001\tlat\tde de\nhan-00000\than\t的一是\n"
HYP = "lat-00000\tlat\tabc xx fg\nlat-00001\tlat\tde de\nhan-00000\than\t的二是\n"

TABLE = "language\tB0\tE0\nen-US\t6.3\t6.1\nfr-FR\t12.9\t12.0\nSize\t143M\t208M\n"


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def transcripts(tmp_path):
    ref = tmp_path / "ref.txt"
    hyp = tmp_path / "hyp.txt"
    ref.write_text(REF, encoding="utf-8")
    hyp.write_text(HYP, encoding="utf-8")
    return ref, hyp


class TestGroup:
    def test_version(self, runner):
        result = runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert __version__ in result.output

    def test_help_lists_commands(self, runner):
        result = runner.invoke(cli, [])
        assert result.exit_code == 0
        for name in ("gen-data", "train-first-pass", "train-delib", "decode", "rescore", "evaluate", "params"):
            assert name in result.output


class TestParams:
    def test_total(self, runner):
        result = runner.invoke(cli, ["-q", "params", "--preset", "B1"])
        assert result.exit_code == 0
        total = count_params(Config.from_preset("B1")).total
        assert result.output.strip().split("\t")[:2] == ["total", str(total)]

    def test_breakdown(self, runner):
        result = runner.invoke(cli, ["-q", "params", "--preset", "E1", "--breakdown"])
        assert result.exit_code == 0
        lines = result.output.strip().splitlines()
        assert [line.split("\t")[0] for line in lines] == [
            "encoder.causal",
            "encoder.cascaded",
            "transducer.prediction",
            "transducer.joint",
            "delib.text_encoder",
            "delib.decoder",
            "total",
        ]
        assert sum(int(line.split("\t")[1]) for line in lines[:-1]) == int(lines[-1].split("\t")[1])

    def test_overrides(self, runner):
        result = runner.invoke(cli, ["-q", "params", "--preset", "B1", "--set", "delib.enabled=true"])
        assert result.exit_code == 0
        assert int(result.output.split("\t")[1]) == count_params(Config.from_preset("E1")).total

    def test_config_file(self, runner, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text("delib:\n  enabled: false\n")
        result = runner.invoke(cli, ["-q", "-c", str(path), "params"])
        assert result.exit_code == 0
        assert int(result.output.split("\t")[1]) == count_params(Config.from_preset("B1")).total

    def test_unknown_preset_exits_2(self, runner):
        assert runner.invoke(cli, ["-q", "params", "--preset", "nope"]).exit_code == 2

    def test_bad_override_exits_2(self, runner):
        assert runner.invoke(cli, ["-q", "params", "--set", "encoder.dim=wide"]).exit_code == 2


class TestEvaluate:
    def test_identical_files_score_zero(self, runner, transcripts):
        ref, _ = transcripts
        result = runner.invoke(cli, ["-q", "evaluate", "--ref", str(ref), "--hyp", str(ref), "--char-level", "han"])
        assert result.exit_code == 0
        footer = [line for line in result.output.splitlines() if line.startswith("Avg. WER")]
        assert footer[0].split()[-1] == "0.00"

    def test_side_by_side(self, runner, transcripts, tmp_path):
        ref, hyp = transcripts
        out = tmp_path / "report" / "wer.txt"
        result = runner.invoke(
            cli,
            ["-q", "evaluate", "--ref", str(ref), "--hyp", str(ref), "--hyp", str(hyp), "--char-level", "han", "-o", str(out)],
        )
        assert result.exit_code == 0
        rows = {line.split()[0]: line.split()[1:] for line in result.output.splitlines()[2:] if line and line[0] != "-"}
        assert rows["lat"] == ["0.00", "20.00"]
        assert rows["han"] == ["0.00", "33.33"]
        assert out.exists() and out.with_suffix(".tsv").exists()

    def test_published_table(self, runner, tmp_path):
        table = tmp_path / "table.tsv"
        table.write_text(TABLE, encoding="utf-8")
        result = runner.invoke(cli, ["-q", "evaluate", "--table", str(table)])
        assert result.exit_code == 0
        lines = result.output.splitlines()
        assert lines[-2].split()[-2:] == ["9.60", "9.05"]
        assert lines[-1].split()[-2:] == ["143M", "208M"]

    def test_table_excludes_transcripts(self, runner, transcripts, tmp_path):
        ref, _ = transcripts
        table = tmp_path / "table.tsv"
        table.write_text(TABLE, encoding="utf-8")
        assert runner.invoke(cli, ["-q", "evaluate", "--table", str(table), "--ref", str(ref)]).exit_code == 2

    def test_mismatched_ids_exit_2(self, runner, transcripts, tmp_path):
        ref, _ = transcripts
        partial = tmp_path / "partial.txt"
        partial.write_text("lat-00000\tlat\tabc\n", encoding="utf-8")
        assert runner.invoke(cli, ["-q", "evaluate", "--ref", str(ref), "--hyp", str(partial)]).exit_code == 2


class TestFirstPassGeometry:
    def test_deliberation_follows_first_pass(self):
        fp_cfg = Config.from_preset("tiny")
        fp_cfg.apply_overrides(["encoder.noncausal_layers=3", "vocab_size=120"])
        delib_cfg = Config.from_preset("tiny")
        delib_cfg.apply_overrides(["delib.lambda=0.25"])
        merged = with_first_pass_geometry(delib_cfg, fp_cfg)
        assert merged.encoder.noncausal_layers == 3
        assert merged.vocab_size == 120
        assert merged.delib.lambda_weight == 0.25
        assert delib_cfg.encoder.noncausal_layers == 1

    def test_train_delib_on_overridden_first_pass(self, runner, small_corpus, tmp_path):
        train = ["--preset", "tiny", "--steps", "1", "--set", "train.batch_size=2"]
        fp, delib = tmp_path / "fp", tmp_path / "delib"
        result = runner.invoke(
            cli,
            ["-q", "train-first-pass", "--data", str(small_corpus), "-o", str(fp), "--set", "encoder.noncausal_layers=3"]
            + train,
        )
        assert result.exit_code == 0, result.output
        result = runner.invoke(
            cli, ["-q", "train-delib", "--first-pass-ckpt", str(fp), "--data", str(small_corpus), "-o", str(delib)] + train
        )
        assert result.exit_code == 0, result.output
        echo = yaml.safe_load((delib / "config.yaml").read_text(encoding="utf-8"))
        assert echo["encoder"]["noncausal_layers"] == 3

        nbest = tmp_path / "dev.nbest"
        result = runner.invoke(
            cli, ["-q", "decode", "--ckpt", str(fp), "--data", str(small_corpus), "-o", str(nbest), "--beam", "2"]
        )
        assert result.exit_code == 0, result.output
        result = runner.invoke(
            cli,
            ["-q", "rescore", "--delib-ckpt", str(delib), "--nbest", str(nbest), "--data", str(small_corpus),
             "-o", str(tmp_path / "dev.rescored.nbest")],
        )
        assert result.exit_code == 0, result.output
        assert (tmp_path / "dev.rescored.selected.txt").exists()


class TestGenData:
    def test_deterministic(self, runner, tmp_path):
        spec = tmp_path / "spec.yaml"
        spec.write_text("sizes: {lat: 6, grk: 4, han: 4}\n")
        for name in ("a", "b"):
            result = runner.invoke(cli, ["-q", "gen-data", "--spec", str(spec), "-o", str(tmp_path / name), "--seed", "3"])
            assert result.exit_code == 0
        assert directory_checksums(tmp_path / "a") == directory_checksums(tmp_path / "b")
        assert (tmp_path / "a" / "corpus.yaml").exists()

    def test_bad_spec_exits_2(self, runner, tmp_path):
        spec = tmp_path / "spec.yaml"
        spec.write_text("sizes: {lat: 6}\n")
        assert runner.invoke(cli, ["-q", "gen-data", "--spec", str(spec), "-o", str(tmp_path / "out")]).exit_code == 2
