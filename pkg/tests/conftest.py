"""
Pytest configuration and shared fixtures for Functional Load Toolkit tests.
"""
import pytest
from pathlib import Path
import tempfile

from src.core.corpus import parse_token_stream, parse_weighted_lexicon
from src.core.schema import parse_schema


FIXTURES_DIR = Path(__file__).parent / "fixtures"

TOY_SEQUENCE = "abaccaaccaabbacabab"


@pytest.fixture
def temp_dir():
    """Create a temporary directory for test outputs."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def fixtures_dir():
    """Directory holding schema, corpus, contrast and model fixtures."""
    return FIXTURES_DIR


def fixture_text(*parts: str) -> str:
    return FIXTURES_DIR.joinpath(*parts).read_text(encoding="utf-8")


@pytest.fixture
def toy_schema():
    """Three-symbol alphabet {a, b, c}."""
    return parse_schema("atomic phn = a b c\n")


@pytest.fixture
def toy_corpus(toy_schema):
    """The 19-symbol worked example as one utterance."""
    return parse_token_stream(" ".join(TOY_SEQUENCE) + "\n", toy_schema, "phn")


@pytest.fixture
def syl_schema():
    """Phonemes, stressed syllables and words."""
    return parse_schema(fixture_text("schemas", "syl.schema"))


@pytest.fixture
def words_schema():
    return parse_schema(fixture_text("schemas", "words.schema"))


@pytest.fixture
def words_lexicon(words_schema):
    """Weighted lexicon {bat: 4, pat: 2, cat: 2}."""
    return parse_weighted_lexicon(fixture_text("corpora", "words.lexicon"), words_schema, "word")
