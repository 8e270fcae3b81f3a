"""
Unit tests for job configuration loading.
"""
import pytest

from src.config import CorpusFormat, OutputFormat, get_env_config, load_config
from src.core.errors import ConfigError


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv("FLOAD_JOBS", raising=False)
    monkeypatch.delenv("FLOAD_LOG_LEVEL", raising=False)


@pytest.fixture
def config_file(temp_dir):
    path = temp_dir / "job.yaml"
    path.write_text(
        "schema: toy.schema\n"
        "type: phn\n"
        "corpus-format: stream\n"
        "n: 3\n"
        "output: json\n"
        "pairs: a b c\n"
    )
    return path


class TestLoadConfig:
    """Test suite for layered configuration."""

    def test_defaults(self):
        config = load_config()
        assert config.n == 1
        assert config.jobs == 1
        assert config.output is OutputFormat.TSV
        assert config.corpus_format is CorpusFormat.STREAM
        assert config.contrasts == []
        assert config.consistency_threshold == 0.9
        assert config.significant_digits == 12

    def test_yaml_file(self, config_file):
        config = load_config(str(config_file))
        assert config.schema_file == "toy.schema"
        assert config.object_type == "phn"
        assert config.n == 3
        assert config.output is OutputFormat.JSON
        assert config.pairs == ["a", "b", "c"]

    def test_overrides_take_precedence(self, config_file):
        config = load_config(str(config_file), {"n": 2, "output": None, "contrasts": ()})
        assert config.n == 2
        assert config.output is OutputFormat.JSON

    def test_field_name_aliases(self):
        """Both ``schema`` and ``schema_file`` name the schema path."""
        config = load_config(overrides={"schema_file": "a.schema", "object_type": "syl", "threshold": 0.8})
        assert config.schema_file == "a.schema"
        assert config.object_type == "syl"
        assert config.consistency_threshold == 0.8

    def test_single_contrast_string(self):
        assert load_config(overrides={"contrasts": "bc.contrast"}).contrasts == ["bc.contrast"]

    def test_pair_type_defaults_to_object_type(self):
        assert load_config(overrides={"type": "phn"}).pair_type == "phn"
        assert load_config(overrides={"type": "syl", "atomic_type": "phn"}).pair_type == "phn"

    def test_lexicon_requires_unigrams(self):
        with pytest.raises(ConfigError, match="n=1 only"):
            load_config(overrides={"corpus_format": "lexicon", "n": 2})

    def test_join_requires_stream(self):
        with pytest.raises(ConfigError, match="requires a stream corpus"):
            load_config(overrides={"corpus_format": "lexicon", "join_lexicon": "pron.tsv"})

    def test_invalid_order(self):
        with pytest.raises(ConfigError, match="Configuration validation failed"):
            load_config(overrides={"n": 0})

    def test_unknown_key(self, temp_dir):
        path = temp_dir / "job.yaml"
        path.write_text("ngram: 2\n")
        with pytest.raises(ConfigError, match="ngram"):
            load_config(str(path))

    def test_missing_file(self, temp_dir):
        with pytest.raises(ConfigError, match="not found"):
            load_config(str(temp_dir / "absent.yaml"))

    def test_non_mapping_file(self, temp_dir):
        path = temp_dir / "job.yaml"
        path.write_text("- a\n- b\n")
        with pytest.raises(ConfigError, match="must contain a mapping"):
            load_config(str(path))

    def test_inputs_exclude_output_settings(self, config_file):
        inputs = load_config(str(config_file), {"jobs": 4}).inputs()
        assert inputs["schema"] == "toy.schema"
        assert "output" not in inputs
        assert "jobs" not in inputs


class TestEnvironment:
    """Test suite for environment variables."""

    def test_jobs_from_environment(self, monkeypatch):
        monkeypatch.setenv("FLOAD_JOBS", "3")
        assert load_config().jobs == 3
        assert load_config(overrides={"jobs": 2}).jobs == 2

    def test_invalid_jobs(self, monkeypatch):
        monkeypatch.setenv("FLOAD_JOBS", "many")
        with pytest.raises(ConfigError, match="FLOAD_JOBS must be an integer"):
            get_env_config()

    def test_log_level(self, monkeypatch):
        assert get_env_config()["log_level"] == "WARNING"
        monkeypatch.setenv("FLOAD_LOG_LEVEL", "debug")
        assert get_env_config()["log_level"] == "DEBUG"
