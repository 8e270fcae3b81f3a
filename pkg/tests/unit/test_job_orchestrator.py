"""
Unit tests for JobOrchestrator component.
"""
import json

import pytest

from src.config import load_config
from src.core.corpus import TokenStreamCorpus, WeightedLexicon
from src.core.errors import AlignmentError, ConfigError, InputError
from src.core.job_orchestrator import JobOrchestrator
from src.core.processing_stage import ProcessingStageError


def make_orchestrator(**overrides):
    return JobOrchestrator(load_config(overrides=overrides))


@pytest.fixture
def toy_job(fixtures_dir):
    return {
        "schema": str(fixtures_dir / "schemas" / "toy.schema"),
        "corpus": str(fixtures_dir / "corpora" / "toy.corpus"),
        "type": "phn",
    }


@pytest.fixture
def words_job(fixtures_dir):
    return {
        "schema": str(fixtures_dir / "schemas" / "words.schema"),
        "corpus": str(fixtures_dir / "corpora" / "words.lexicon"),
        "corpus_format": "lexicon",
        "type": "word",
    }


def write_matrix(path, rows):
    lines = ["x\ty\tn\tfl\trank"] + [f"{x}\t{y}\t1\t{fl}\t0" for x, y, fl in rows]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


class TestLoading:
    """Test suite for the loading stages."""

    def test_load_stream(self, fixtures_dir, toy_job):
        contrast = str(fixtures_dir / "contrasts" / "bc.contrast")
        context = make_orchestrator(contrasts=[contrast], **toy_job).load()
        assert isinstance(context.corpus, TokenStreamCorpus)
        assert context.corpus.size == 19
        assert [contrast_id for contrast_id, _ in context.contrasts] == ["bc"]
        assert context.contrasts[0][1].name == "bc"
        assert not context.errors
        assert [check.stage for check in context.checks] == ["Schema Loading", "Corpus Loading", "Contrast Loading"]

    def test_load_lexicon(self, words_job):
        context = make_orchestrator(**words_job).load()
        assert isinstance(context.corpus, WeightedLexicon)
        assert context.get_summary()["entries"] == 3

    def test_load_joined_lexicon(self, fixtures_dir):
        orchestrator = make_orchestrator(
            schema=str(fixtures_dir / "schemas" / "words.schema"),
            corpus=str(fixtures_dir / "corpora" / "keys.txt"),
            join_lexicon=str(fixtures_dir / "corpora" / "pronunciations.tsv"),
            miss="skip",
            type="word",
        )
        context = orchestrator.load()
        assert context.corpus.object_type == "word"
        assert context.join_diagnostics.misses == 2
        assert context.warnings == ["lexicon join skipped 2 tokens: dog"]

    def test_missing_schema(self):
        with pytest.raises(ProcessingStageError, match="no schema given") as exc_info:
            make_orchestrator().load()
        assert isinstance(exc_info.value.cause, ConfigError)
        assert exc_info.value.exit_code == 1

    def test_missing_file(self, fixtures_dir, toy_job):
        toy_job["corpus"] = str(fixtures_dir / "corpora" / "absent.corpus")
        with pytest.raises(ProcessingStageError, match="file not found"):
            make_orchestrator(**toy_job).load()

    def test_collect_errors(self, fixtures_dir, toy_job):
        """Every stage runs and records its failure."""
        toy_job["corpus"] = str(fixtures_dir / "corpora" / "bad_token.corpus")
        contrasts = [str(fixtures_dir / "contrasts" / "overlap.contrast"), str(fixtures_dir / "contrasts" / "bc.contrast")]
        context = make_orchestrator(contrasts=contrasts, **toy_job).load(collect_errors=True)
        assert [error.stage for error in context.errors] == ["Corpus Loading", "Contrast Loading"]
        assert [contrast_id for contrast_id, _ in context.contrasts] == ["bc"]
        assert context.exit_code == 1
        assert context.get_summary()["status"] == "error"


class TestCommands:
    """Test suite for report-producing commands."""

    def test_run_fl(self, fixtures_dir, toy_job):
        contrasts = [str(fixtures_dir / "contrasts" / name) for name in ("bc.contrast", "identity.contrast")]
        orchestrator = make_orchestrator(contrasts=contrasts, n=2, **toy_job)
        report = orchestrator.run_fl(orchestrator.load())
        assert [row["contrast"] for row in report.rows] == ["bc", "identity"]
        assert report.rows[0]["fl"] == pytest.approx(0.3208, abs=1e-3)
        assert report.rows[1]["fl"] == 0.0
        assert report.meta["inputs"]["n"] == 2

    def test_run_fl_without_contrast(self, toy_job):
        orchestrator = make_orchestrator(**toy_job)
        with pytest.raises(ConfigError, match="no contrast given"):
            orchestrator.run_fl(orchestrator.load())

    def test_run_fl_matrix(self, toy_job):
        orchestrator = make_orchestrator(pairs="c b a", n=2, **toy_job)
        report = orchestrator.run_fl_matrix(orchestrator.load())
        assert [(row["x"], row["y"]) for row in report.rows] == [("a", "b"), ("a", "c"), ("b", "c")]
        assert report.meta["atomic_type"] == "phn"

    def test_run_cohorts(self, fixtures_dir, words_job):
        orchestrator = make_orchestrator(
            contrasts=[str(fixtures_dir / "contrasts" / "bp.contrast")], **words_job
        )
        report = orchestrator.run_cohorts(orchestrator.load())
        assert report.rows[0]["contrast"] == "bp"
        assert report.rows[0]["pie"] == pytest.approx(54.09, abs=0.01)

    def test_run_cohorts_single_word(self, fixtures_dir, words_job, temp_dir):
        """A one-word lexicon still reports every statistic except PIE."""
        lexicon = temp_dir / "one.lexicon"
        lexicon.write_text("1\t(b a t)\n")
        orchestrator = make_orchestrator(
            contrasts=[str(fixtures_dir / "contrasts" / "bp.contrast")], **{**words_job, "corpus": str(lexicon)}
        )
        report = orchestrator.run_cohorts(orchestrator.load())
        assert report.rows[0]["pie"] is None
        assert report.rows[0]["cohorts"] == 1
        assert report.meta["pie_undefined"] == ["bp"]

    def test_run_cohorts_requires_lexicon(self, fixtures_dir, toy_job):
        orchestrator = make_orchestrator(
            contrasts=[str(fixtures_dir / "contrasts" / "bc.contrast")], **toy_job
        )
        with pytest.raises(ConfigError, match="needs a lexicon"):
            orchestrator.run_cohorts(orchestrator.load())

    def test_run_phoneme_fl(self, fixtures_dir, toy_job):
        orchestrator = make_orchestrator(
            similar=str(fixtures_dir / "models" / "similar.txt"), n=2, **toy_job
        )
        report = orchestrator.run_phoneme_fl(orchestrator.load())
        assert [(row["phoneme"], row["target"]) for row in report.rows] == [
            ("a", "b"),
            ("a", "c"),
            ("a", "*"),
            ("b", "c"),
            ("b", "*"),
        ]
        assert report.rows[2]["weight"] == 1.0
        assert report.meta["weighting"] == "frequency"

    def test_run_validate(self, toy_job):
        report = make_orchestrator(**toy_job).run_validate()
        assert report.meta["exit_code"] == 0
        assert {row["status"] for row in report.rows} == {"ok"}


class TestAlpha:
    """Test suite for report alignment and consistency."""

    def test_read_tsv_report(self, temp_dir):
        path = write_matrix(temp_dir / "m.tsv", [("b", "a", 0.2), ("a", "c", 0.3)])
        frame = JobOrchestrator.read_fl_report(path)
        assert list(zip(frame["x"], frame["y"])) == [("a", "b"), ("a", "c")]
        assert frame["fl"].tolist() == [0.2, 0.3]

    def test_read_json_report(self, temp_dir):
        path = temp_dir / "m.json"
        path.write_text(json.dumps({"meta": {}, "results": [{"x": "a", "y": "b", "fl": 0.5}]}))
        assert JobOrchestrator.read_fl_report(str(path))["fl"].tolist() == [0.5]

    def test_read_wrong_report(self, temp_dir):
        path = temp_dir / "fl.tsv"
        path.write_text("contrast\tn\tfl\nbc\t2\t0.3\n")
        with pytest.raises(AlignmentError, match="not an fl-matrix report"):
            JobOrchestrator.read_fl_report(str(path))

    def test_duplicate_pairs(self, temp_dir):
        path = write_matrix(temp_dir / "m.tsv", [("a", "b", 0.2), ("b", "a", 0.3)])
        with pytest.raises(AlignmentError, match="duplicate pair keys"):
            JobOrchestrator.read_fl_report(path)

    def test_run_alpha(self, temp_dir):
        left = write_matrix(temp_dir / "a.tsv", [("a", "b", 1), ("a", "c", 2), ("b", "c", 3), ("a", "d", 4)])
        right = write_matrix(temp_dir / "b.tsv", [("a", "d", 9), ("b", "c", 5), ("a", "c", 4), ("a", "b", 2)])
        report = JobOrchestrator(load_config()).run_alpha(left, right)
        row = report.rows[0]
        assert row["alpha"] == pytest.approx(0.9648, abs=1e-4)
        assert row["pairs"] == 4
        assert row["consistent"] is True

    def test_run_alpha_misaligned(self, temp_dir):
        left = write_matrix(temp_dir / "a.tsv", [("a", "b", 1), ("a", "c", 2), ("b", "c", 3)])
        right = write_matrix(temp_dir / "b.tsv", [("a", "b", 1), ("a", "c", 2), ("b", "d", 3)])
        with pytest.raises(AlignmentError, match="pair keys differ: 1 only in"):
            JobOrchestrator(load_config()).run_alpha(left, right)

    def test_missing_report(self, temp_dir):
        with pytest.raises(InputError, match="file not found"):
            JobOrchestrator.read_fl_report(str(temp_dir / "absent.tsv"))
