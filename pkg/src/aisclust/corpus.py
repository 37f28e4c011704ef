"""Corpus ingestion: Reuters-style SGML files and plaintext directory trees.

The SGML reader is a deliberately lenient single-pass scanner. Wire-service
archives of this vintage are not well-formed XML (bare ampersands, stray
control characters, unterminated records), so the reader recognizes only the
record, body and topics elements, case-insensitively, strips every other tag
to plain text, and logs malformed records to a per-source manifest instead of
failing the whole file.
"""

from __future__ import annotations

import logging
import os
import random
import re
from dataclasses import dataclass, replace

log = logging.getLogger(__name__)

#: Label assigned to documents whose source record carried no topic.
UNLABELED = "unlabeled"

_RECORD_OPEN = re.compile(r"<reuters(?=[\s>])[^>]*>", re.IGNORECASE)
_RECORD_CLOSE = re.compile(r"</reuters\s*>", re.IGNORECASE)
_TOPIC_CHILD = re.compile(r"<d(?:\s[^>]*)?>(.*?)</d\s*>", re.IGNORECASE | re.DOTALL)
_ANY_TAG = re.compile(r"<[^>]*>")
_ENTITY = re.compile(r"&#?\w+;")


@dataclass(frozen=True)
class Document:
    """One document: opaque id, raw body text, class label.

    ``source`` records which input file the document came from; subsetting
    is performed per source file.
    """

    id: str
    body: str
    label: str = UNLABELED
    source: str = ""


@dataclass(frozen=True)
class ManifestEntry:
    """Read/skip tally and notes for one source file."""

    source: str
    records_read: int
    records_skipped: int
    skips: tuple[tuple[str, str], ...] = ()  # (record id, reason)
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class DocumentSet:
    """An ordered collection of documents plus the per-source manifest."""

    documents: tuple[Document, ...]
    source_manifest: tuple[ManifestEntry, ...] = ()

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def ids(self):
        return [d.id for d in self.documents]

    def labels(self):
        return {d.id: d.label for d in self.documents}


def _decode_entities(text):
    # Angle-bracket entities first so decoding "&amp;" cannot fabricate tags,
    # then ampersand, then drop anything else that still looks like an entity.
    for needle, repl in (("&lt;", "<"), ("&gt;", ">"), ("&amp;", "&")):
        text = re.sub(re.escape(needle), lambda _m, r=repl: r, text, flags=re.IGNORECASE)
    return _ENTITY.sub("", text)


def _element_text(content, name):
    """Inner text of the first <name>...</name> element, or None.

    Lenient: an opening tag without a closing one captures to the end of the
    record. Nested markup is stripped and the common entities are decoded.
    """
    open_re = re.compile(rf"<{name}(?:\s[^>]*)?>", re.IGNORECASE)
    close_re = re.compile(rf"</{name}\s*>", re.IGNORECASE)
    m = open_re.search(content)
    if m is None:
        return None
    end = close_re.search(content, m.end())
    inner = content[m.end():end.start()] if end else content[m.end():]
    return _decode_entities(_ANY_TAG.sub(" ", inner)).strip()


def parse_sgml_corpus(data, source_name):
    """Parse one SGML source into documents.

    Returns ``(documents, manifest_entry)``. Document ids are
    ``source_name + ":" + ordinal`` where the ordinal counts record openings
    in file order. Records with no closing tag are skipped and show up in the
    manifest with a reason; they never abort the rest of the file.

    The first topic child becomes the document label; additional topics are
    noted in the manifest. Records without topics (or with an empty topics
    element) are kept as unlabeled.
    """
    if isinstance(data, bytes):
        text = data.decode("latin-1")
    else:
        text = data
    opens = list(_RECORD_OPEN.finditer(text))
    closes = list(_RECORD_CLOSE.finditer(text))

    documents = []
    skips = []
    notes = []
    ci = 0
    for ordinal, mo in enumerate(opens):
        doc_id = f"{source_name}:{ordinal}"
        while ci < len(closes) and closes[ci].start() < mo.end():
            ci += 1
        if ci == len(closes):
            skips.append((doc_id, "record has no closing tag"))
            continue
        close = closes[ci]
        if ordinal + 1 < len(opens) and opens[ordinal + 1].start() < close.start():
            # The next record opens before this one closes; the closing tag
            # belongs to that record, so this one is unterminated.
            skips.append((doc_id, "record not closed before next record"))
            continue
        ci += 1
        content = text[mo.end():close.start()]

        body = _element_text(content, "body")
        if body is None:
            body = ""
            notes.append(f"{doc_id}: record has no body element")

        label = UNLABELED
        topics_match = re.search(r"<topics(?:\s[^>]*)?>(.*?)</topics\s*>",
                                 content, re.IGNORECASE | re.DOTALL)
        if topics_match:
            children = [t.strip() for t in _TOPIC_CHILD.findall(topics_match.group(1))]
            children = [t for t in children if t]
            if children:
                label = children[0]
                if len(children) > 1:
                    notes.append(f"{doc_id}: extra topics dropped: {', '.join(children[1:])}")
        documents.append(Document(id=doc_id, body=body, label=label, source=source_name))

    if not opens:
        notes.append("no records found")
    entry = ManifestEntry(
        source=source_name,
        records_read=len(opens),
        records_skipped=len(skips),
        skips=tuple(skips),
        notes=tuple(notes),
    )
    for rid, reason in skips:
        log.warning("skipped record %s: %s", rid, reason)
    return documents, entry


def load_sgml(path):
    """Load an SGML file, or every ``*.sgm`` file in a directory.

    Sources are read in lexicographic name order so the resulting document
    order is reproducible.
    """
    if os.path.isdir(path):
        names = sorted(n for n in os.listdir(path) if n.lower().endswith(".sgm"))
        if not names:
            raise FileNotFoundError(f"no .sgm files under {path!r}")
        paths = [os.path.join(path, n) for n in names]
    elif os.path.isfile(path):
        paths = [path]
    else:
        raise FileNotFoundError(f"corpus path does not exist: {path!r}")

    documents = []
    manifest = []
    for p in paths:
        with open(p, "rb") as fh:
            data = fh.read()
        docs, entry = parse_sgml_corpus(data, os.path.basename(p))
        documents.extend(docs)
        manifest.append(entry)
    return DocumentSet(documents=tuple(documents), source_manifest=tuple(manifest))


def load_plaintext_dir(path):
    """Load a plaintext tree: one document per file.

    A file's label is its parent directory name when the layout is
    ``root/label/file``; files sitting directly under the root are unlabeled.
    Unreadable files are skipped with a manifest entry; an unreadable or
    missing root directory is an error.
    """
    if not os.path.isdir(path):
        raise NotADirectoryError(f"not a directory: {path!r}")

    def _raise(err):
        raise err

    rel_paths = []
    for dirpath, dirnames, filenames in os.walk(path, onerror=_raise):
        dirnames.sort()
        for name in filenames:
            rel_paths.append(os.path.relpath(os.path.join(dirpath, name), path))
    rel_paths.sort()

    documents = []
    manifest = []
    for rel in rel_paths:
        rel_id = rel.replace(os.sep, "/")
        parts = rel_id.split("/")
        label = parts[-2] if len(parts) >= 2 else UNLABELED
        try:
            with open(os.path.join(path, rel), "rb") as fh:
                body = fh.read().decode("latin-1")
        except OSError as exc:
            manifest.append(ManifestEntry(source=rel_id, records_read=0,
                                          records_skipped=1,
                                          skips=((rel_id, f"unreadable: {exc}"),)))
            continue
        documents.append(Document(id=rel_id, body=body, label=label, source=rel_id))
        manifest.append(ManifestEntry(source=rel_id, records_read=1, records_skipped=0))
    return DocumentSet(documents=tuple(documents), source_manifest=tuple(manifest))


def sample_subset(document_set, per_source, seed):
    """Pick up to ``per_source`` documents from each source file.

    The draw is uniform without replacement within each source and fully
    determined by ``seed``. Selected documents keep their original relative
    order. Sources with fewer documents than requested contribute everything
    they have.
    """
    if per_source < 1:
        raise ValueError(f"per_source must be >= 1, got {per_source}")
    by_source = {}
    order = []
    for idx, doc in enumerate(document_set.documents):
        if doc.source not in by_source:
            by_source[doc.source] = []
            order.append(doc.source)
        by_source[doc.source].append(idx)

    rng = random.Random(seed)
    chosen = []
    for source in order:
        idxs = by_source[source]
        take = min(per_source, len(idxs))
        picked = rng.sample(range(len(idxs)), take)
        chosen.extend(idxs[i] for i in sorted(picked))
    chosen.sort()
    docs = tuple(document_set.documents[i] for i in chosen)
    return replace(document_set, documents=docs)
