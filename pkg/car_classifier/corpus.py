"""Class-annotated, dependency-parsed corpora.

File format (UTF-8, one document per ``# newdoc`` block)::

    # newdoc id = d1
    # class = GSPO
    # sent_id = d1-s1
    1	John	John	NP	2	nsubj
    2	gives	give	VVZ	0	root
    ...
    <blank line ends the sentence>

Token lines carry INDEX, SURFACE, LEMMA, POS, HEAD, DEPREL separated by TABs.
Full 10-column CoNLL-U lines are accepted too (POS is XPOS, falling back to
UPOS); multiword ranges and empty nodes are skipped. The lemma column may be
``_`` or ``<unknown>``, in which case the surface form stands in for it.
"""

from __future__ import annotations

import hashlib
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from .handler_wrappers import HandlerError

logger = logging.getLogger(__name__)

_META_RE = re.compile(r"^#\s*(newdoc(?:\s+id)?|class|sent_id)\s*(?:=\s*(.*?))?\s*$")
_UNKNOWN_LEMMAS = frozenset({"", "_", "<unknown>"})
_ROOT_LABELS = frozenset({"", "_", "root", "ROOT"})

# Class given to unannotated documents read for classification.
UNLABELED = "?"


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------
class CorpusParseError(HandlerError):
    """A line of the corpus file cannot be read."""

    def __init__(self, message: str, *, path: str, line: int) -> None:
        super().__init__(
            f"{path}:{line}: {message}",
            hint="Token lines need 6 (or 10) TAB-separated columns",
            code="parse_error",
            path=path,
            line=line,
        )
        self.line = line


class CorpusSchemaError(HandlerError):
    """Document metadata is missing or inconsistent."""

    def __init__(self, message: str, **data: object) -> None:
        super().__init__(
            message,
            hint="Every document needs one '# newdoc id = ...' and one '# class = ...' line",
            code="schema_error",
            **data,
        )


class TreeStructureError(HandlerError):
    """Head indices of a sentence do not form a rooted tree."""

    def __init__(self, message: str, sentence_id: str) -> None:
        super().__init__(
            f"sentence {sentence_id}: {message}",
            code="tree_error",
            sentence_id=sentence_id,
        )
        self.sentence_id = sentence_id


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Token:
    index: int
    surface: str
    lemma: str
    pos: str
    head: int
    dep_label: str = ""

    @property
    def is_root(self) -> bool:
        return self.head == 0


@dataclass(frozen=True)
class Sentence:
    id: str
    doc_id: str
    tokens: tuple[Token, ...]

    def token(self, index: int) -> Token:
        """Return the token with 1-based ``index``."""
        return self.tokens[index - 1]

    def lemmas(self) -> list[str]:
        return [t.lemma for t in self.tokens]

    def text(self) -> str:
        return " ".join(t.surface for t in self.tokens)


@dataclass(frozen=True)
class Document:
    id: str
    class_label: str
    sentences: tuple[Sentence, ...]


@dataclass(frozen=True)
class Corpus:
    """An immutable list of documents with unique document and sentence ids."""

    documents: tuple[Document, ...]
    _by_id: dict[str, Document] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        by_id: dict[str, Document] = {}
        sentence_ids: set[str] = set()
        for doc in self.documents:
            if doc.id in by_id:
                raise CorpusSchemaError(f"duplicate document id '{doc.id}'", doc_id=doc.id)
            by_id[doc.id] = doc
            for sentence in doc.sentences:
                if sentence.id in sentence_ids:
                    raise CorpusSchemaError(
                        f"duplicate sentence id '{sentence.id}'", sentence_id=sentence.id
                    )
                if sentence.doc_id != doc.id:
                    raise CorpusSchemaError(
                        f"sentence '{sentence.id}' points to document '{sentence.doc_id}'",
                        sentence_id=sentence.id,
                    )
                sentence_ids.add(sentence.id)
        object.__setattr__(self, "_by_id", by_id)

    @property
    def classes(self) -> frozenset[str]:
        return frozenset(doc.class_label for doc in self.documents)

    @property
    def class_labels(self) -> list[str]:
        """Classes in sorted order."""
        return sorted(self.classes)

    def __len__(self) -> int:
        return len(self.documents)

    def document(self, doc_id: str) -> Document:
        return self._by_id[doc_id]

    def sentences(self) -> list[Sentence]:
        return [s for doc in self.documents for s in doc.sentences]

    def subset(self, doc_ids: Iterable[str]) -> Corpus:
        """Documents whose id is in ``doc_ids``, in corpus order."""
        wanted = set(doc_ids)
        return Corpus(tuple(doc for doc in self.documents if doc.id in wanted))


@dataclass(frozen=True)
class CorpusStats:
    documents: int
    sentences: int
    tokens: int
    class_counts: dict[str, int]
    mean_document_length: float
    std_document_length: float
    head_verb_fraction: float

    def to_dict(self) -> dict:
        return {
            "documents": self.documents,
            "sentences": self.sentences,
            "tokens": self.tokens,
            "classes": dict(sorted(self.class_counts.items())),
            "mean_document_length": self.mean_document_length,
            "std_document_length": self.std_document_length,
            "head_verb_fraction": self.head_verb_fraction,
        }


# ---------------------------------------------------------------------------
# Tree checks
# ---------------------------------------------------------------------------
def check_tree(sentence_id: str, tokens: tuple[Token, ...]) -> None:
    """Raise TreeStructureError unless heads form a single-rooted tree."""
    n = len(tokens)
    roots = [t for t in tokens if t.head == 0]
    for t in tokens:
        if t.head == t.index:
            raise TreeStructureError(f"token {t.index} is its own head", sentence_id)
        if not 0 <= t.head <= n:
            raise TreeStructureError(
                f"token {t.index} has head {t.head} outside 0..{n}", sentence_id
            )
    if len(roots) != 1:
        raise TreeStructureError(f"expected exactly one root, found {len(roots)}", sentence_id)
    # Walk up from every token; a path longer than n revisits a node.
    for t in tokens:
        current, steps = t, 0
        while current.head != 0:
            current = tokens[current.head - 1]
            steps += 1
            if steps > n:
                raise TreeStructureError(f"cycle through token {t.index}", sentence_id)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------
class _CorpusBuilder:
    """Line-driven state machine behind ``parse_corpus_text``."""

    def __init__(self, source: str, default_class: Optional[str] = None) -> None:
        self.source = source
        self.default_class = default_class
        self.documents: list[Document] = []
        self._doc_id: Optional[str] = None
        self._doc_class: Optional[str] = None
        self._doc_line = 0
        self._sentences: list[Sentence] = []
        self._sent_id: Optional[str] = None
        self._tokens: list[Token] = []
        self._doc_ids: set[str] = set()
        self._sent_ids: set[str] = set()

    # -- metadata -----------------------------------------------------------
    def comment(self, line: str, line_no: int) -> None:
        match = _META_RE.match(line)
        if match is None:
            return
        key, value = match.group(1), (match.group(2) or "").strip()
        if key.startswith("newdoc"):
            self.finish_document()
            if not value:
                raise CorpusSchemaError(
                    f"{self.source}:{line_no}: document without an id", line=line_no
                )
            if value in self._doc_ids:
                raise CorpusSchemaError(f"duplicate document id '{value}'", doc_id=value, line=line_no)
            self._doc_ids.add(value)
            self._doc_id, self._doc_class, self._doc_line = value, None, line_no
        elif key == "class":
            if self._doc_id is None:
                raise CorpusSchemaError(
                    f"{self.source}:{line_no}: class annotation outside a document", line=line_no
                )
            if self._doc_class is not None:
                raise CorpusSchemaError(
                    f"document '{self._doc_id}' has more than one class annotation",
                    doc_id=self._doc_id,
                    line=line_no,
                )
            if not value:
                raise CorpusSchemaError(
                    f"document '{self._doc_id}' has an empty class", doc_id=self._doc_id, line=line_no
                )
            self._doc_class = value
        else:
            self.finish_sentence()
            self._sent_id = value or None

    # -- tokens -------------------------------------------------------------
    def token(self, line: str, line_no: int) -> None:
        if self._doc_id is None:
            raise CorpusParseError("token line outside a document", path=self.source, line=line_no)
        columns = [c.strip() for c in line.split("\t")]
        if len(columns) == 10:
            index_s, surface, lemma, upos, xpos, _feats, head_s, label = columns[:8]
            pos = xpos if xpos not in ("", "_") else upos
        elif len(columns) == 6:
            index_s, surface, lemma, pos, head_s, label = columns
        else:
            raise CorpusParseError(
                f"expected 6 or 10 columns, got {len(columns)}", path=self.source, line=line_no
            )
        if "-" in index_s or "." in index_s:
            return  # multiword range or empty node
        try:
            index = int(index_s)
            head = int(head_s)
        except ValueError:
            raise CorpusParseError(
                f"non-integer INDEX/HEAD ({index_s!r}, {head_s!r})", path=self.source, line=line_no
            )
        if index != len(self._tokens) + 1:
            raise CorpusParseError(
                f"token index {index} out of sequence (expected {len(self._tokens) + 1})",
                path=self.source,
                line=line_no,
            )
        if not surface:
            raise CorpusParseError("empty surface form", path=self.source, line=line_no)
        if lemma in _UNKNOWN_LEMMAS:
            lemma = surface
        if head == 0 and label in _ROOT_LABELS:
            label = ""
        elif label == "_":
            label = ""
        self._tokens.append(Token(index, surface, lemma, pos, head, label if head else ""))

    # -- block ends ---------------------------------------------------------
    def finish_sentence(self) -> None:
        if not self._tokens:
            return
        assert self._doc_id is not None
        sent_id = self._sent_id or f"{self._doc_id}-s{len(self._sentences) + 1}"
        if sent_id in self._sent_ids:
            raise CorpusSchemaError(f"duplicate sentence id '{sent_id}'", sentence_id=sent_id)
        tokens = tuple(self._tokens)
        check_tree(sent_id, tokens)
        self._sent_ids.add(sent_id)
        self._sentences.append(Sentence(sent_id, self._doc_id, tokens))
        self._tokens = []
        self._sent_id = None

    def finish_document(self) -> None:
        self.finish_sentence()
        if self._doc_id is None:
            return
        if self._doc_class is None:
            self._doc_class = self.default_class
        if self._doc_class is None:
            raise CorpusSchemaError(
                f"document '{self._doc_id}' has no class annotation",
                doc_id=self._doc_id,
                line=self._doc_line,
            )
        if not self._sentences:
            raise CorpusSchemaError(f"document '{self._doc_id}' has no sentences", doc_id=self._doc_id)
        self.documents.append(Document(self._doc_id, self._doc_class, tuple(self._sentences)))
        self._doc_id, self._doc_class, self._sentences = None, None, []


def parse_corpus_text(text: str, source: str = "<string>", default_class: Optional[str] = None) -> Corpus:
    """Parse corpus-format text.

    ``default_class`` labels documents without a class annotation (documents
    to classify); when None such documents are a schema error.
    """
    builder = _CorpusBuilder(source, default_class)
    line_no = 0
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            builder.finish_sentence()
        elif stripped.startswith("#"):
            builder.comment(stripped, line_no)
        else:
            builder.token(line, line_no)
    builder.finish_document()
    if not builder.documents:
        raise CorpusParseError("no documents found", path=source, line=line_no)
    corpus = Corpus(tuple(builder.documents))
    logger.debug("Parsed %d documents from %s", len(corpus), source)
    return corpus


def parse_corpus(path: Union[str, Path], default_class: Optional[str] = None) -> Corpus:
    """Parse a corpus file.

    Raises:
        CorpusParseError: unreadable file, malformed line, or no documents.
        CorpusSchemaError: missing/duplicated ids or class annotations.
        TreeStructureError: heads out of range, self-loops, cycles, several roots.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CorpusParseError(f"cannot read corpus file ({exc})", path=str(path), line=0)
    return parse_corpus_text(text, source=str(path), default_class=default_class)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------
def serialize_corpus(corpus: Corpus) -> str:
    lines: list[str] = []
    for doc in corpus.documents:
        lines.append(f"# newdoc id = {doc.id}")
        lines.append(f"# class = {doc.class_label}")
        for sentence in doc.sentences:
            lines.append(f"# sent_id = {sentence.id}")
            for t in sentence.tokens:
                label = t.dep_label or ("root" if t.head == 0 else "_")
                lines.append("\t".join((str(t.index), t.surface, t.lemma, t.pos, str(t.head), label)))
            lines.append("")
    return "\n".join(lines) + "\n"


def write_corpus(corpus: Corpus, path: Union[str, Path]) -> None:
    Path(path).write_text(serialize_corpus(corpus), encoding="utf-8")


def corpus_digest(corpus: Corpus) -> str:
    """SHA-256 of the canonical serialization."""
    return hashlib.sha256(serialize_corpus(corpus).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Views
# ---------------------------------------------------------------------------
def forgetful(corpus: Corpus) -> list[tuple[Sentence, str]]:
    """Every sentence paired with the class of its document."""
    return [(s, doc.class_label) for doc in corpus.documents for s in doc.sentences]


def sentence_root(sentence: Sentence) -> Token:
    return next(t for t in sentence.tokens if t.head == 0)


def dependencies(sentence: Sentence) -> list[tuple[Token, Token, str]]:
    """(dependent, governor, label) for every non-root token."""
    return [(t, sentence.token(t.head), t.dep_label) for t in sentence.tokens if t.head != 0]


def corpus_statistics(corpus: Corpus) -> CorpusStats:
    lengths = np.array(
        [sum(len(s.tokens) for s in doc.sentences) for doc in corpus.documents], dtype=float
    )
    sentences = corpus.sentences()
    class_counts: dict[str, int] = {}
    for doc in corpus.documents:
        class_counts[doc.class_label] = class_counts.get(doc.class_label, 0) + 1
    verb_heads = sum(1 for s in sentences if sentence_root(s).pos.startswith("V"))
    return CorpusStats(
        documents=len(corpus),
        sentences=len(sentences),
        tokens=int(lengths.sum()),
        class_counts=class_counts,
        mean_document_length=float(lengths.mean()),
        std_document_length=float(lengths.std()),
        head_verb_fraction=verb_heads / len(sentences),
    )
