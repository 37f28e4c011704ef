"""Tests for SGML/plaintext ingestion and per-source subsampling."""

import random
import string

import pytest

from aisclust import (
    UNLABELED,
    DocumentSet,
    load_plaintext_dir,
    load_sgml,
    parse_sgml_corpus,
    sample_subset,
)

WELL_FORMED = """\
<REUTERS NEWID="1">
<TOPICS><D>grain</D></TOPICS>
<TEXT><BODY>abc</BODY></TEXT>
</REUTERS>
"""


def record(body="abc", topics="<D>grain</D>", close=True):
    closing = "</REUTERS>" if close else ""
    return (f'<REUTERS NEWID="x"><TOPICS>{topics}</TOPICS>'
            f"<TEXT><BODY>{body}</BODY></TEXT>{closing}\n")


class TestParseSgml:
    def test_single_well_formed_record(self):
        docs, entry = parse_sgml_corpus(WELL_FORMED, "f.sgm")
        assert len(docs) == 1
        assert docs[0].body == "abc"
        assert docs[0].label == "grain"
        assert docs[0].id == "f.sgm:0"
        assert docs[0].source == "f.sgm"
        assert entry.records_read == 1
        assert entry.records_skipped == 0

    def test_topics_without_children_is_unlabeled(self):
        docs, _ = parse_sgml_corpus(record(topics=""), "f.sgm")
        assert docs[0].label == UNLABELED

    def test_missing_topics_element_is_unlabeled(self):
        text = "<REUTERS><TEXT><BODY>abc</BODY></TEXT></REUTERS>"
        docs, _ = parse_sgml_corpus(text, "f.sgm")
        assert docs[0].label == UNLABELED

    def test_first_topic_wins_extras_noted(self):
        docs, entry = parse_sgml_corpus(
            record(topics="<D>grain</D><D>wheat</D>"), "f.sgm")
        assert docs[0].label == "grain"
        assert any("wheat" in note for note in entry.notes)

    def test_unclosed_middle_record_skipped(self):
        text = record(body="one") + record(body="two", close=False) + record(body="three")
        docs, entry = parse_sgml_corpus(text, "f.sgm")
        assert [d.body for d in docs] == ["one", "three"]
        assert entry.records_read == 3
        assert entry.records_skipped == 1
        assert entry.skips[0][0] == "f.sgm:1"
        assert "not closed" in entry.skips[0][1]

    def test_unclosed_final_record_skipped(self):
        text = record(body="one") + record(body="two", close=False)
        docs, entry = parse_sgml_corpus(text, "f.sgm")
        assert [d.body for d in docs] == ["one"]
        assert entry.skips[0][1] == "record has no closing tag"

    def test_skipped_record_keeps_its_ordinal(self):
        text = record(close=False) + record(body="kept")
        docs, _ = parse_sgml_corpus(text, "f.sgm")
        assert docs[0].id == "f.sgm:1"

    def test_entities_decoded_and_unknown_dropped(self):
        docs, _ = parse_sgml_corpus(
            record(body="a &lt;b&gt; &amp; c &copy; d"), "f.sgm")
        assert docs[0].body == "a <b> & c  d"

    def test_nested_markup_stripped_from_body(self):
        docs, _ = parse_sgml_corpus(record(body="a <E>b</E> c"), "f.sgm")
        assert docs[0].body == "a  b  c"

    def test_unclosed_body_captures_to_record_end(self):
        text = "<REUTERS><TEXT><BODY>tail text</REUTERS>"
        docs, _ = parse_sgml_corpus(text, "f.sgm")
        assert docs[0].body == "tail text"

    def test_record_without_body_noted(self):
        text = "<REUTERS><TOPICS><D>g</D></TOPICS></REUTERS>"
        docs, entry = parse_sgml_corpus(text, "f.sgm")
        assert docs[0].body == ""
        assert any("no body" in note for note in entry.notes)

    def test_bytes_input_decoded_latin1(self):
        docs, _ = parse_sgml_corpus(record(body="caf\xe9").encode("latin-1"), "f.sgm")
        assert docs[0].body == "caf\xe9"

    def test_empty_input_notes_no_records(self):
        docs, entry = parse_sgml_corpus("nothing here", "f.sgm")
        assert docs == []
        assert "no records found" in entry.notes

    def test_parse_is_deterministic(self):
        text = record() + record(close=False) + record(body="z")
        first = parse_sgml_corpus(text, "f.sgm")
        second = parse_sgml_corpus(text, "f.sgm")
        assert first == second

    def test_parser_total_on_byte_soup(self):
        """No random tag-like garbage may crash the scanner."""
        rng = random.Random(99)
        fragments = ["<REUTERS", "</REUTERS>", "<BODY>", "</BODY>", "<TOPICS>",
                     "</TOPICS>", "<D>", "</D>", "&amp;", "&", "<", ">", '"']
        for _ in range(200):
            parts = [rng.choice(fragments) if rng.random() < 0.5 else
                     "".join(rng.choices(string.printable, k=rng.randrange(12)))
                     for _ in range(rng.randrange(30))]
            docs, entry = parse_sgml_corpus("".join(parts), "soup.sgm")
            assert entry.records_read >= len(docs)


class TestLoadSgml:
    def test_single_file(self, tmp_path):
        p = tmp_path / "one.sgm"
        p.write_text(WELL_FORMED)
        ds = load_sgml(str(p))
        assert len(ds) == 1
        assert ds.documents[0].id == "one.sgm:0"

    def test_directory_reads_sgm_files_in_name_order(self, tmp_path):
        (tmp_path / "b.sgm").write_text(record(body="from b"))
        (tmp_path / "a.sgm").write_text(record(body="from a"))
        (tmp_path / "ignored.txt").write_text(record(body="nope"))
        ds = load_sgml(str(tmp_path))
        assert [d.body for d in ds] == ["from a", "from b"]
        assert [e.source for e in ds.source_manifest] == ["a.sgm", "b.sgm"]

    def test_missing_path_raises(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_sgml(str(tmp_path / "nope"))

    def test_directory_without_sgm_files_raises(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_sgml(str(tmp_path))

    def test_fixture_corpus_loads(self, fixture_corpus_dir):
        ds = load_sgml(fixture_corpus_dir)
        assert len(ds) == 400
        assert len(ds.source_manifest) == 20
        assert all(e.records_skipped == 0 for e in ds.source_manifest)
        labels = set(ds.labels().values())
        assert UNLABELED not in labels
        assert len(labels) == 5


class TestLoadPlaintext:
    def test_labeled_subdirectories(self, tmp_path):
        (tmp_path / "grain").mkdir()
        (tmp_path / "grain" / "a.txt").write_text("alpha")
        (tmp_path / "grain" / "b.txt").write_text("beta")
        ds = load_plaintext_dir(str(tmp_path))
        assert len(ds) == 2
        assert all(d.label == "grain" for d in ds)

    def test_loose_file_is_unlabeled(self, tmp_path):
        (tmp_path / "grain").mkdir()
        (tmp_path / "grain" / "a.txt").write_text("alpha")
        (tmp_path / "loose.txt").write_text("gamma")
        ds = load_plaintext_dir(str(tmp_path))
        by_id = {d.id: d.label for d in ds}
        assert by_id["grain/a.txt"] == "grain"
        assert by_id["loose.txt"] == UNLABELED

    def test_empty_directory(self, tmp_path):
        ds = load_plaintext_dir(str(tmp_path))
        assert len(ds) == 0

    def test_not_a_directory_raises(self, tmp_path):
        with pytest.raises(NotADirectoryError):
            load_plaintext_dir(str(tmp_path / "missing"))


class TestSampleSubset:
    def _corpus(self, sources=4, per=10):
        text = "".join(record(body=f"doc {i}") for i in range(per))
        documents = []
        manifest = []
        for s in range(sources):
            docs, entry = parse_sgml_corpus(text, f"s{s}.sgm")
            documents.extend(docs)
            manifest.append(entry)
        return DocumentSet(documents=tuple(documents),
                           source_manifest=tuple(manifest))

    def test_per_source_counts(self):
        ds = self._corpus(sources=4, per=10)
        sub = sample_subset(ds, 3, seed=0)
        assert len(sub) == 12
        per_source = {}
        for d in sub:
            per_source[d.source] = per_source.get(d.source, 0) + 1
        assert per_source == {f"s{s}.sgm": 3 for s in range(4)}

    def test_oversized_request_is_identity(self):
        ds = self._corpus(sources=2, per=5)
        sub = sample_subset(ds, 50, seed=1)
        assert sub.documents == ds.documents

    def test_same_seed_reproduces_selection(self):
        ds = self._corpus()
        assert sample_subset(ds, 4, seed=7).ids() == sample_subset(ds, 4, seed=7).ids()

    def test_different_seeds_differ(self):
        ds = self._corpus(sources=20, per=20)
        a = sample_subset(ds, 5, seed=0).ids()
        b = sample_subset(ds, 5, seed=1).ids()
        assert a != b

    def test_original_order_preserved(self):
        ds = self._corpus()
        sub = sample_subset(ds, 5, seed=3)
        position = {d.id: i for i, d in enumerate(ds)}
        order = [position[d.id] for d in sub]
        assert order == sorted(order)

    def test_invalid_per_source(self):
        with pytest.raises(ValueError):
            sample_subset(self._corpus(), 0, seed=0)


def test_document_set_views(two_sentence_docs):
    assert len(two_sentence_docs) == 2
    assert two_sentence_docs.ids() == ["d0", "d1"]
    assert two_sentence_docs.labels() == {"d0": "a", "d1": "b"}
