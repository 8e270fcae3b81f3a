"""
Unit tests for corpus ingestion, lexicon joins and n-gram counting.
"""
import pytest

from src.core.corpus import (
    MissPolicy,
    NGramTable,
    TokenStreamCorpus,
    WeightedLexicon,
    count_ngrams,
    join_lexicon,
    lexicon_to_table,
    merge_tables,
    parse_key_stream,
    parse_pronunciations,
    parse_token_stream,
    parse_weighted_lexicon,
    token_frequencies,
    unfold_corpus,
    unfold_lexicon,
)
from src.core.errors import DegenerateCorpusError, InputError, JoinError, ParseError, TypeViolationError
from src.core.schema import AtomicValue


TOY_BIGRAMS = {
    ("a", "a"): 2.0,
    ("a", "b"): 4.0,
    ("a", "c"): 3.0,
    ("b", "a"): 3.0,
    ("b", "b"): 1.0,
    ("c", "a"): 3.0,
    ("c", "c"): 2.0,
}


class TestTokenStream:
    """Test suite for token-stream corpora."""

    def test_parse_toy_corpus(self, toy_corpus):
        """One line is one utterance."""
        assert len(toy_corpus.utterances) == 1
        assert toy_corpus.size == 19

    def test_blank_lines_and_comments_skipped(self, toy_schema):
        corpus = parse_token_stream("# header\na b\n\nc a b  # note\n", toy_schema, "phn")
        assert [[v.canonical for v in u] for u in corpus.utterances] == [["a", "b"], ["c", "a", "b"]]

    def test_composite_objects(self, syl_schema, fixtures_dir):
        """Each line holds a sequence of composite serializations."""
        text = (fixtures_dir / "corpora" / "syllables.corpus").read_text()
        corpus = parse_token_stream(text, syl_schema, "syl")
        assert len(corpus.utterances) == 3
        assert corpus.utterances[1][1].canonical == "(k ae n t s ; primary)"

    def test_bad_token_reports_line(self, toy_schema, fixtures_dir):
        """Tokens outside the inventory fail with their line number."""
        text = (fixtures_dir / "corpora" / "bad_token.corpus").read_text()
        with pytest.raises(TypeViolationError) as exc_info:
            parse_token_stream(text, toy_schema, "phn")
        assert exc_info.value.line == 2
        assert "'x'" in str(exc_info.value)

    def test_undefined_object_type(self, toy_schema):
        with pytest.raises(InputError, match="undefined object type"):
            parse_token_stream("a\n", toy_schema, "syl")

    def test_empty_utterance_rejected(self, toy_schema):
        with pytest.raises(InputError, match="utterance 0 is empty"):
            TokenStreamCorpus(toy_schema, "phn", ((),))

    def test_concat(self, toy_schema):
        """Concatenation keeps utterance boundaries."""
        left = parse_token_stream("a b\n", toy_schema, "phn")
        right = parse_token_stream("c\n", toy_schema, "phn")
        joined = left.concat(right)
        assert len(joined.utterances) == 2
        assert joined.size == 3


class TestWeightedLexicon:
    """Test suite for weighted lexicons."""

    def test_parse(self, words_lexicon):
        assert len(words_lexicon.entries) == 3
        assert words_lexicon.total_weight == 8.0

    def test_probabilities(self, words_lexicon):
        probabilities = {v.canonical: p for v, p in words_lexicon.probabilities().items()}
        assert probabilities == {"(b a t)": 0.5, "(p a t)": 0.25, "(c a t)": 0.25}

    def test_duplicate_entry(self, words_schema):
        """Duplicates are an error rather than being summed."""
        with pytest.raises(ParseError, match="duplicate entry"):
            parse_weighted_lexicon("1\t(b a t)\n2\t(b a t)\n", words_schema, "word")

    @pytest.mark.parametrize("weight", ["0", "-1", "inf", "nan"])
    def test_non_positive_weight(self, words_schema, weight):
        with pytest.raises(ParseError, match="weight must be positive"):
            parse_weighted_lexicon(f"{weight}\t(b a t)\n", words_schema, "word")

    def test_invalid_weight(self, words_schema):
        with pytest.raises(ParseError, match="invalid weight"):
            parse_weighted_lexicon("many\t(b a t)\n", words_schema, "word")

    def test_missing_tab(self, words_schema):
        with pytest.raises(ParseError, match="TAB"):
            parse_weighted_lexicon("4 (b a t)\n", words_schema, "word")

    def test_lexicon_to_table(self, words_lexicon):
        """Lexicon weights become unigram counts."""
        table = lexicon_to_table(words_lexicon)
        assert table.n == 1
        assert table.counts[("(b a t)",)] == 4.0
        assert table.total == 8.0

    def test_empty_lexicon_is_degenerate(self, words_schema):
        with pytest.raises(DegenerateCorpusError):
            lexicon_to_table(WeightedLexicon(words_schema, "word", {}))


class TestLexiconJoin:
    """Test suite for joining word-key streams with pronunciations."""

    @pytest.fixture
    def keys(self, fixtures_dir):
        return parse_key_stream((fixtures_dir / "corpora" / "keys.txt").read_text())

    @pytest.fixture
    def pronunciations(self, fixtures_dir, words_schema):
        text = (fixtures_dir / "corpora" / "pronunciations.tsv").read_text()
        return parse_pronunciations(text, words_schema, "word")

    def test_key_stream_inventory(self, keys):
        """The key type admits exactly the observed keys."""
        assert keys.schema.atomic("key").inventory == ("bat", "cat", "pat", "dog")
        assert keys.size == 6

    def test_skip_policy(self, keys, pronunciations):
        """Skipped keys are counted; utterances left empty are dropped."""
        corpus, diagnostics = join_lexicon(keys, pronunciations, MissPolicy.SKIP)
        assert diagnostics.joined == 4
        assert diagnostics.misses == 2
        assert diagnostics.missing_keys == ("dog",)
        assert diagnostics.dropped_utterances == 1
        assert [[v.canonical for v in u] for u in corpus.utterances] == [
            ["(b a t)", "(c a t)"],
            ["(p a t)", "(b a t)"],
        ]
        assert corpus.object_type == "word"

    def test_error_policy(self, keys, pronunciations):
        with pytest.raises(JoinError, match="'dog' \\(utterance 2\\)"):
            join_lexicon(keys, pronunciations, MissPolicy.ERROR)

    def test_duplicate_pronunciation(self, words_schema):
        with pytest.raises(ParseError, match="duplicate pronunciation"):
            parse_pronunciations("bat\t(b a t)\nbat\t(p a t)\n", words_schema, "word")


class TestNGramCounting:
    """Test suite for n-gram tables."""

    def test_toy_bigrams(self, toy_corpus):
        """The worked example's bigram table."""
        table = count_ngrams(toy_corpus, 2)
        assert table.counts == TOY_BIGRAMS
        assert table.total == 18.0
        assert table.distinct == 7

    def test_unigrams(self, toy_corpus):
        table = count_ngrams(toy_corpus, 1)
        assert table.counts == {("a",): 9.0, ("b",): 5.0, ("c",): 5.0}

    def test_total_single_utterance(self, toy_corpus):
        """N - n + 1 n-grams for a single utterance."""
        for n in range(1, 6):
            assert count_ngrams(toy_corpus, n).total == 19 - n + 1

    def test_ngrams_do_not_cross_utterances(self, toy_schema):
        """Short utterances contribute nothing; boundaries are never bridged."""
        corpus = parse_token_stream("a b\nc a b\nc\n", toy_schema, "phn")
        table = count_ngrams(corpus, 2)
        assert table.counts == {("a", "b"): 2.0, ("c", "a"): 1.0}
        assert table.total == 3.0

    def test_parallel_counting_is_identical(self, toy_schema):
        """Any number of workers gives the same table."""
        text = "".join(" ".join("abcab"[i:] + "ca"[: i % 2 + 1]) + "\n" for i in range(5))
        corpus = parse_token_stream(text, toy_schema, "phn")
        assert count_ngrams(corpus, 2, jobs=3) == count_ngrams(corpus, 2, jobs=1)

    def test_invalid_order(self, toy_corpus):
        with pytest.raises(InputError, match="n must be >= 1"):
            count_ngrams(toy_corpus, 0)

    def test_table_rejects_wrong_key_length(self):
        with pytest.raises(InputError):
            NGramTable(2, {("a",): 1.0})

    def test_merge_tables(self, toy_schema):
        """Merging tables of two corpora equals counting their concatenation."""
        left = parse_token_stream("a b a\n", toy_schema, "phn")
        right = parse_token_stream("b a c\n", toy_schema, "phn")
        merged = merge_tables([count_ngrams(left, 2), count_ngrams(right, 2)])
        assert merged == count_ngrams(left.concat(right), 2)

    def test_merge_tables_order_mismatch(self, toy_corpus):
        with pytest.raises(InputError, match="cannot merge"):
            merge_tables([count_ngrams(toy_corpus, 1), count_ngrams(toy_corpus, 2)])


class TestUnfoldingAndFrequencies:
    """Test suite for re-expressing corpora at a lower level."""

    def test_unfold_corpus(self, syl_schema, fixtures_dir):
        """Syllables unfold to their phonemes, utterance by utterance."""
        text = (fixtures_dir / "corpora" / "syllables.corpus").read_text()
        phonemes = unfold_corpus(parse_token_stream(text, syl_schema, "syl"), "phones")
        assert phonemes.object_type == "phn"
        assert [v.canonical for v in phonemes.utterances[0]] == ["k", "ae", "n", "d", "i"]

    def test_unfold_lexicon(self, words_lexicon):
        """Elements carry the summed weight of every entry they occur in."""
        segments = unfold_lexicon(words_lexicon, "segs")
        weights = {v.canonical: w for v, w in segments.entries.items()}
        assert weights == {"a": 8.0, "t": 8.0, "b": 4.0, "p": 2.0, "c": 2.0}

    def test_unfold_requires_string_component(self, syl_schema):
        corpus = TokenStreamCorpus(syl_schema, "phn", ((AtomicValue("k"),),))
        with pytest.raises(InputError, match="not composite"):
            unfold_corpus(corpus, "phones")

    def test_token_frequencies_corpus(self, toy_corpus):
        assert token_frequencies(toy_corpus, "phn") == {"a": 9.0, "b": 5.0, "c": 5.0}

    def test_token_frequencies_lexicon(self, words_lexicon):
        """Lexicon occurrences are weighted; absent tokens count zero."""
        frequencies = token_frequencies(words_lexicon, "phn")
        assert frequencies == {"a": 8.0, "b": 4.0, "c": 2.0, "p": 2.0, "t": 8.0}

    def test_token_frequencies_include_unseen(self, toy_schema):
        corpus = parse_token_stream("a a\n", toy_schema, "phn")
        assert token_frequencies(corpus, "phn") == {"a": 2.0, "b": 0.0, "c": 0.0}
