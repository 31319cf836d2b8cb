"""Document ingestion: MediaWiki XML dumps, JSON-lines and plain files.

Everything here streams. ``parse_mediawiki_dump`` drives expat directly so
that a parse error can be reported with its byte offset.
"""

from __future__ import annotations

import bz2
import json
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator
from xml.parsers import expat

from .minhash import PipelineParams

_READ_CHUNK = 1 << 16
_BZ2_MAGIC = b"BZh"


class CorpusError(Exception):
    """Raised for unreadable or malformed corpus input."""


@dataclass(frozen=True)
class Document:
    doc_id: int
    title: str
    body: str
    namespace: int = 0
    is_redirect: bool = False


@dataclass(frozen=True)
class SentenceRecord:
    doc_id: int
    sentence_index: int
    text: str

    @property
    def sentence_id(self) -> tuple[int, int]:
        return (self.doc_id, self.sentence_index)

    @property
    def char_length(self) -> int:
        return len(self.text)


# -- MediaWiki XML -----------------------------------------------------------

_PAGE_FIELDS = {
    ("page", "title"): "title",
    ("page", "ns"): "ns",
    ("page", "id"): "id",
    ("revision", "text"): "text",
}


class _DumpHandler:
    def __init__(self):
        self.stack: list[str] = []
        self.page: dict | None = None
        self.field: str | None = None
        self.buf: list[str] = []
        self.ready: list[dict] = []
        self.ordinal = 0

    def start(self, name, attrs):
        name = name.rpartition(":")[2]
        parent = self.stack[-1] if self.stack else None
        self.stack.append(name)
        if name == "page":
            self.page = {"ordinal": self.ordinal, "redirect": False}
            self.ordinal += 1
        elif self.page is not None:
            if name == "redirect" and parent == "page":
                self.page["redirect"] = True
            key = _PAGE_FIELDS.get((parent, name))
            if key is not None:
                self.field = key
                self.buf = []

    def end(self, name):
        name = name.rpartition(":")[2]
        self.stack.pop()
        if self.page is None:
            return
        if self.field is not None and name in ("title", "ns", "id", "text"):
            self.page[self.field] = "".join(self.buf)
            self.field = None
        elif name == "page":
            self.ready.append(self.page)
            self.page = None

    def chars(self, data):
        if self.field is not None:
            self.buf.append(data)


def _page_to_document(page: dict) -> Document:
    label = repr(page["title"]) if "title" in page else f"#{page['ordinal']}"
    for key, what in (("title", "<title>"), ("ns", "<ns>"), ("id", "<id>"), ("text", "<revision><text>")):
        if key not in page:
            raise CorpusError(f"page {label}: missing required element {what}")
    try:
        doc_id = int(page["id"].strip())
        ns = int(page["ns"].strip())
    except ValueError as exc:
        raise CorpusError(f"page {label}: non-integer <id> or <ns>") from exc
    return Document(
        doc_id=doc_id,
        title=page["title"],
        body=page["text"],
        namespace=ns,
        is_redirect=page["redirect"],
    )


def parse_mediawiki_dump(stream: BinaryIO) -> Iterator[Document]:
    """Yield one ``Document`` per ``<page>`` of a MediaWiki export, in order.

    Compressed (bz2) streams are detected by their magic bytes. Namespace
    and redirect flags are passed through; see ``filter_articles``.
    """
    stream = _maybe_decompress(stream)
    handler = _DumpHandler()
    parser = expat.ParserCreate()
    parser.buffer_text = True
    parser.StartElementHandler = handler.start
    parser.EndElementHandler = handler.end
    parser.CharacterDataHandler = handler.chars

    while True:
        chunk = stream.read(_READ_CHUNK)
        final = not chunk
        try:
            parser.Parse(chunk, final)
        except expat.ExpatError as exc:
            raise CorpusError(
                f"malformed XML at byte offset {parser.ErrorByteIndex}: "
                f"{expat.ErrorString(exc.code)}"
            ) from None
        for page in handler.ready:
            yield _page_to_document(page)
        handler.ready.clear()
        if final:
            break


# -- plain text ----------------------------------------------------------------


def parse_plaintext(
    stream: BinaryIO, format: str = "jsonl", *, doc_id: int = 0, title: str = ""
) -> Iterator[Document]:
    """Documents from JSON-lines (``{"id", "title", "text"}`` per line) or,
    with ``format="file"``, the whole stream as one document.
    """
    if format == "file":
        body = stream.read().decode("utf-8")
        yield Document(doc_id=doc_id, title=title, body=body)
        return
    if format != "jsonl":
        raise ValueError(f"unknown plaintext format {format!r}")

    seen: set[int] = set()
    for lineno, raw in enumerate(_maybe_decompress(stream), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw.decode("utf-8"))
            ident = int(obj["id"])
            title, text = obj["title"], obj["text"]
            if not isinstance(title, str) or not isinstance(text, str):
                raise TypeError("'title' and 'text' must be strings")
            doc = Document(doc_id=ident, title=title, body=text)
        except (ValueError, KeyError, TypeError) as exc:
            detail = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
            raise CorpusError(f"line {lineno}: {detail}") from None
        if ident in seen:
            raise CorpusError(f"line {lineno}: duplicate document id {ident}")
        seen.add(ident)
        yield doc


def parse_directory(path: str | os.PathLike) -> Iterator[Document]:
    """One document per regular file, ids assigned in sorted filename order."""
    files = sorted(p for p in Path(path).iterdir() if p.is_file())
    for ordinal, p in enumerate(files):
        with open(p, "rb") as fh:
            yield from parse_plaintext(fh, "file", doc_id=ordinal, title=p.stem)


def filter_articles(docs: Iterable[Document]) -> Iterator[Document]:
    return (d for d in docs if d.namespace == 0 and not d.is_redirect)


def _maybe_decompress(stream: BinaryIO) -> BinaryIO:
    if isinstance(stream, bz2.BZ2File):
        return stream
    if hasattr(stream, "peek"):
        head = stream.peek(3)[:3]
    elif stream.seekable():
        pos = stream.tell()
        head = stream.read(3)
        stream.seek(pos)
    else:
        stream = _Peekable(stream)
        head = stream.peek(3)
    if head == _BZ2_MAGIC:
        return bz2.BZ2File(stream)
    return stream


class _Peekable:
    """Minimal peek() support for streams that lack it."""

    def __init__(self, stream):
        self._stream = stream
        self._head = b""

    def peek(self, n):
        if len(self._head) < n:
            self._head += self._stream.read(n - len(self._head))
        return self._head

    def read(self, n=-1):
        if n is None or n < 0:
            out, self._head = self._head + self._stream.read(), b""
            return out
        out, self._head = self._head[:n], self._head[n:]
        if len(out) < n:
            out += self._stream.read(n - len(out))
        return out

    def readable(self):
        return True

    def readline(self):
        line = b""
        while not line.endswith(b"\n"):
            c = self.read(1)
            if not c:
                break
            line += c
        return line

    def __iter__(self):
        return iter(self.readline, b"")


# -- corpus sources ----------------------------------------------------------

FORMATS = ("mediawiki", "jsonl", "files")


def detect_format(path: str | os.PathLike) -> str:
    p = Path(path)
    if p.is_dir():
        return "files"
    name = p.name.lower()
    if name.endswith((".jsonl", ".json", ".jsonl.bz2", ".ndjson")):
        return "jsonl"
    return "mediawiki"


@dataclass(frozen=True)
class CorpusSource:
    """A re-readable corpus on disk. ``documents()`` yields filtered articles."""

    path: str
    format: str = "auto"

    def resolved_format(self) -> str:
        fmt = detect_format(self.path) if self.format == "auto" else self.format
        if fmt not in FORMATS:
            raise ValueError(f"unknown corpus format {fmt!r}; expected one of {FORMATS}")
        return fmt

    def documents(self) -> Iterator[Document]:
        fmt = self.resolved_format()
        if fmt == "files":
            if not Path(self.path).is_dir():
                raise CorpusError(f"cannot read corpus directory {self.path}")
            yield from parse_directory(self.path)
            return
        try:
            fh = open(self.path, "rb")
        except OSError as exc:
            raise CorpusError(f"cannot read corpus {self.path}: {exc.strerror}") from None
        with fh:
            if fmt == "mediawiki":
                yield from filter_articles(parse_mediawiki_dump(fh))
            else:
                yield from parse_plaintext(fh, "jsonl")


def iter_documents(source) -> Iterator[Document]:
    """Accept a ``CorpusSource``, a path, or any re-iterable of ``Document``."""
    if isinstance(source, (str, os.PathLike)):
        source = CorpusSource(os.fspath(source))
    if hasattr(source, "documents"):
        return iter(source.documents())
    return iter(source)


# -- markup stripping ----------------------------------------------------------

_REF_OPEN = re.compile(r"<ref\b[^>]*?(/?)>", re.IGNORECASE)
_REF_CLOSE = re.compile(r"</ref\s*>", re.IGNORECASE)


def _skip_nested(text: str, i: int, opener: str, closer: str) -> int:
    """Index just past the construct opened at ``i``, or -1 if it never closes."""
    depth = 0
    n = len(text)
    while i < n:
        if text.startswith(opener, i):
            depth += 1
            i += len(opener)
        elif text.startswith(closer, i):
            depth -= 1
            i += len(closer)
            if depth == 0:
                return i
        else:
            i += 1
    return -1


def _split_top_level(inner: str) -> list[str]:
    parts, depth, start, i = [], 0, 0, 0
    while i < len(inner):
        if inner.startswith("[[", i):
            depth += 1
            i += 2
        elif inner.startswith("]]", i) and depth:
            depth -= 1
            i += 2
        elif inner[i] == "|" and depth == 0:
            parts.append(inner[start:i])
            i += 1
            start = i
        else:
            i += 1
    parts.append(inner[start:])
    return parts


def _strip_once(text: str) -> str:
    out: list[str] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "<":
            if text.startswith("<!--", i):
                end = text.find("-->", i + 4)
                i = n if end < 0 else end + 3
                continue
            m = _REF_OPEN.match(text, i)
            if m:
                if m.group(1):
                    i = m.end()
                else:
                    close = _REF_CLOSE.search(text, m.end())
                    i = n if close is None else close.end()
                continue
        elif c == "{":
            for opener, closer in (("{{", "}}"), ("{|", "|}")):
                if text.startswith(opener, i):
                    end = _skip_nested(text, i, opener, closer)
                    i = n if end < 0 else end
                    break
            else:
                out.append(c)
                i += 1
            continue
        elif c == "[" and text.startswith("[[", i):
            end = _skip_nested(text, i, "[[", "]]")
            if end < 0:
                break
            parts = _split_top_level(text[i + 2 : end - 2])
            out.append(_strip_once(parts[-1]))
            i = end
            continue
        elif c == "'" and text.startswith("''", i):
            while i < n and text[i] == "'":
                i += 1
            continue
        out.append(c)
        i += 1
    return "".join(out)


def strip_markup(body: str) -> str:
    """Remove wiki markup: templates, refs, comments, tables, link syntax and
    bold/italic quotes. Unbalanced constructs are dropped to end of text.

    Applied to a fixpoint, so the result is idempotent.
    """
    while True:
        stripped = _strip_once(body)
        if stripped == body:
            return stripped
        body = stripped


# -- sentence chunking -----------------------------------------------------------

_BOUNDARY = re.compile(r"[.!?](\s+)")
_WS = re.compile(r"\s+")


def split_sentences(text: str) -> list[str]:
    """Split after ``.``, ``!`` or ``?`` followed by whitespace and an uppercase
    letter (or the end of the text). Whitespace inside a sentence, including
    line breaks, collapses to single spaces; empty pieces are dropped.
    """
    pieces = []
    start = 0
    for m in _BOUNDARY.finditer(text):
        nxt = m.end()
        if nxt == len(text) or text[nxt].isupper():
            pieces.append(text[start : m.start(1)])
            start = nxt
    pieces.append(text[start:])
    out = []
    for p in pieces:
        p = _WS.sub(" ", p).strip()
        if p:
            out.append(p)
    return out


def chunk_sentences(doc: Document, params: PipelineParams | None = None) -> list[SentenceRecord]:
    """Sentences of ``doc`` whose positional shingle count lies within
    ``[min_shingles, max_shingles]``. Rejected sentences still consume an index.
    """
    params = params or PipelineParams()
    out = []
    for idx, text in enumerate(split_sentences(doc.body)):
        count = len(text) - params.shingle_len + 1
        if params.min_shingles <= count <= params.max_shingles:
            out.append(SentenceRecord(doc.doc_id, idx, text))
    return out


def iter_sentences(source, params: PipelineParams | None = None, *, strip: bool = True):
    """Every surviving ``SentenceRecord`` of the corpus, in document order."""
    for doc in iter_documents(source):
        yield from chunk_sentences(prepare(doc) if strip else doc, params)


def prepare(doc: Document) -> Document:
    """``doc`` with its body markup-stripped."""
    return Document(doc.doc_id, doc.title, strip_markup(doc.body), doc.namespace, doc.is_redirect)


def write_sentences_tsv(records: Iterable[SentenceRecord], out) -> int:
    n = 0
    for r in records:
        out.write(f"{r.doc_id}\t{r.sentence_index}\t{r.text}\n")
        n += 1
    return n
