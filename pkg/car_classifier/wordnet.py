"""WordNet lexicon, most significant hyperonymic chains and hyperonymization.

Only the noun and verb databases are read. Synsets are nodes of a networkx
DiGraph with an edge from each synset to every hypernym and instance
hypernym. A synset's significance is ``ln(1 + count)`` from a frequency
file; ties are broken by the synset id, so the order is strict and the chain
that always steps to the most significant hypernym is unique.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal, Mapping, Optional, Sequence, Union

import networkx as nx

from .handler_wrappers import HandlerError
from .pruning import Item, PrunedSentence

logger = logging.getLogger(__name__)

ENTITY_ID = "00001740-n"

WordnetPos = Literal["noun", "verb"]
DisambiguationPolicy = Literal["most_frequent", "context_overlap"]

_POS_FILES = {"noun": "noun", "verb": "verb"}
_SS_TYPES = {"n": "noun", "v": "verb", "a": "adj", "s": "adj", "r": "adv"}
_HYPERNYM = "@"
_INSTANCE_HYPERNYM = "@i"
_ID_RE = re.compile(r"^(\d{8})-?([nvasr])$")
_ADJ_MARKER_RE = re.compile(r"\([a-z]+\)$")


class LexiconError(HandlerError):
    """WordNet or frequency data cannot be loaded."""

    def __init__(self, message: str, **data: object) -> None:
        super().__init__(
            message,
            hint="Point --wordnet-dir at a Princeton WordNet 3.0 'dict' directory",
            code="lexicon_error",
            **data,
        )


class UnknownSynsetError(HandlerError):
    def __init__(self, synset_id: str) -> None:
        super().__init__(f"Unknown synset '{synset_id}'", code="not_found", synset_id=synset_id)


@dataclass(frozen=True)
class Synset:
    id: str
    pos: str
    lemmas: tuple[str, ...]
    hypernyms: tuple[str, ...] = ()
    instance_hypernyms: tuple[str, ...] = ()

    @property
    def parents(self) -> tuple[str, ...]:
        """Hypernyms and instance hypernyms, without repeats."""
        return tuple(dict.fromkeys(self.hypernyms + self.instance_hypernyms))


@dataclass(frozen=True)
class HyperonymicChain:
    synsets: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.synsets)

    def __getitem__(self, index: int) -> str:
        return self.synsets[index]

    @property
    def sink(self) -> str:
        return self.synsets[-1]


def normalize_synset_id(raw: str) -> Optional[str]:
    """Accept ``00001740-n`` or ``00001740n``; return the dashed form."""
    match = _ID_RE.match(raw.strip())
    if match is None:
        return None
    return f"{match.group(1)}-{match.group(2)}"


def wordnet_pos(tag: str) -> Optional[WordnetPos]:
    """Map a tagset tag to a WordNet part of speech (N* nouns, V* verbs)."""
    if tag.startswith("N"):
        return "noun"
    if tag.startswith("V"):
        return "verb"
    return None


def _lookup_form(lemma: str) -> str:
    return lemma.strip().lower().replace(" ", "_")


class Lexicon:
    """Synset graph with a strict total order on synsets.

    Synsets, lemma index, frequencies and graph are fixed at construction.
    The only mutable state is a memo of chains already computed by ``msch``.
    """

    def __init__(
        self,
        synsets: Iterable[Synset],
        lemma_index: Optional[Mapping[tuple[str, str], Sequence[str]]] = None,
        frequencies: Optional[Mapping[str, float]] = None,
        *,
        strict: bool = True,
    ) -> None:
        self._synsets: dict[str, Synset] = {}
        for synset in synsets:
            if synset.id in self._synsets:
                raise LexiconError(f"duplicate synset id '{synset.id}'", synset_id=synset.id)
            if not synset.lemmas:
                raise LexiconError(f"synset '{synset.id}' has no lemmas", synset_id=synset.id)
            self._synsets[synset.id] = synset

        self._graph = nx.DiGraph()
        self._graph.add_nodes_from(self._synsets)
        for synset in self._synsets.values():
            for parent in synset.parents:
                if parent not in self._synsets:
                    if strict:
                        raise LexiconError(
                            f"synset '{synset.id}' points to unknown hypernym '{parent}'",
                            synset_id=synset.id,
                            hypernym=parent,
                        )
                    logger.warning("Dropping unresolvable hypernym %s of %s", parent, synset.id)
                    continue
                self._graph.add_edge(synset.id, parent)
        try:
            cycle = nx.find_cycle(self._graph)
        except nx.NetworkXNoCycle:
            cycle = None
        if cycle:
            path = " -> ".join(edge[0] for edge in cycle)
            raise LexiconError(f"hypernym cycle: {path}", cycle=[edge[0] for edge in cycle])

        if lemma_index is None:
            index: dict[tuple[str, str], list[str]] = {}
            for synset in self._synsets.values():
                for lemma in synset.lemmas:
                    ids = index.setdefault((_lookup_form(lemma), synset.pos), [])
                    if synset.id not in ids:
                        ids.append(synset.id)
            lemma_index = index
        self._lemma_index = {key: tuple(ids) for key, ids in lemma_index.items()}

        frequencies = frequencies or {}
        self._counts = {sid: float(frequencies.get(sid, 0.0)) for sid in self._synsets}
        self._rank = {sid: (math.log1p(count), sid) for sid, count in self._counts.items()}
        self._chains: dict[str, HyperonymicChain] = {}

    @classmethod
    def empty(cls) -> Lexicon:
        return cls(())

    # -- accessors -----------------------------------------------------------
    @property
    def synsets(self) -> Mapping[str, Synset]:
        return self._synsets

    @property
    def lemma_index(self) -> Mapping[tuple[str, str], tuple[str, ...]]:
        return self._lemma_index

    @property
    def rank(self) -> Mapping[str, tuple[float, str]]:
        return self._rank

    @property
    def graph(self) -> nx.DiGraph:
        return self._graph

    def __len__(self) -> int:
        return len(self._synsets)

    def __contains__(self, synset_id: object) -> bool:
        return synset_id in self._synsets

    def synset(self, synset_id: str) -> Synset:
        try:
            return self._synsets[synset_id]
        except KeyError:
            raise UnknownSynsetError(synset_id) from None

    def frequency(self, synset_id: str) -> float:
        return self._counts[self.synset(synset_id).id]

    def lookup(self, lemma: str, pos: str) -> tuple[str, ...]:
        return self._lemma_index.get((_lookup_form(lemma), pos), ())

    def sinks(self, pos: Optional[str] = None) -> list[str]:
        return sorted(
            sid
            for sid, out in self._graph.out_degree()
            if out == 0 and (pos is None or self._synsets[sid].pos == pos)
        )

    def verb_sinks(self) -> list[str]:
        return self.sinks("verb")

    def cached_chain(self, synset_id: str) -> Optional[HyperonymicChain]:
        return self._chains.get(synset_id)

    def remember_chain(self, chain: HyperonymicChain) -> None:
        self._chains[chain.synsets[0]] = chain


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------
def _parse_data_line(line: str, path: Path, line_no: int) -> Synset:
    body = line.split(" | ", 1)[0]
    fields = body.split()
    try:
        offset, ss_type = fields[0], fields[2]
        w_cnt = int(fields[3], 16)
        words = [_ADJ_MARKER_RE.sub("", fields[4 + 2 * i]) for i in range(w_cnt)]
        p_pos = 4 + 2 * w_cnt
        p_cnt = int(fields[p_pos])
        hypernyms: list[str] = []
        instances: list[str] = []
        for i in range(p_cnt):
            symbol, target, target_pos = fields[p_pos + 1 + 4 * i: p_pos + 4 + 4 * i]
            if symbol == _HYPERNYM:
                hypernyms.append(f"{target}-{target_pos}")
            elif symbol == _INSTANCE_HYPERNYM:
                instances.append(f"{target}-{target_pos}")
    except (IndexError, ValueError):
        raise LexiconError(f"{path}:{line_no}: malformed data record", path=str(path), line=line_no)
    if ss_type not in _SS_TYPES or not words:
        raise LexiconError(f"{path}:{line_no}: malformed data record", path=str(path), line=line_no)
    return Synset(
        id=f"{offset}-{'a' if ss_type == 's' else ss_type}",
        pos=_SS_TYPES[ss_type],
        lemmas=tuple(words),
        hypernyms=tuple(hypernyms),
        instance_hypernyms=tuple(instances),
    )


def _parse_index_line(line: str, pos_char: str, path: Path, line_no: int) -> tuple[str, list[str]]:
    fields = line.split()
    try:
        lemma = fields[0]
        synset_cnt = int(fields[2])
        p_cnt = int(fields[3])
        start = 4 + p_cnt + 2
        offsets = fields[start: start + synset_cnt]
    except (IndexError, ValueError):
        raise LexiconError(f"{path}:{line_no}: malformed index record", path=str(path), line=line_no)
    if len(offsets) != synset_cnt:
        raise LexiconError(f"{path}:{line_no}: truncated index record", path=str(path), line=line_no)
    return lemma.lower(), [f"{offset}-{pos_char}" for offset in offsets]


def _read_lines(path: Path) -> Iterable[tuple[int, str]]:
    if not path.is_file():
        raise LexiconError(f"missing WordNet file {path}", path=str(path))
    with path.open(encoding="utf-8", errors="replace") as fh:
        for line_no, line in enumerate(fh, start=1):
            # License header lines start with two spaces.
            if not line.strip() or line[0] == " ":
                continue
            yield line_no, line.rstrip("\n")


def load_frequencies(path: Union[str, Path]) -> dict[str, float]:
    """Read synset counts.

    Lines are ``ID<TAB>COUNT`` or whitespace separated; ids may be dashed
    (``02084071-n``) or not (``02084071n``). ``wnver::`` headers, blank
    lines and ``#`` comments are skipped. Repeated ids accumulate.
    """
    path = Path(path)
    if not path.is_file():
        raise LexiconError(f"missing frequency file {path}", path=str(path))
    counts: dict[str, float] = {}
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#") or stripped.startswith("wnver::"):
                continue
            fields = stripped.split()
            synset_id = normalize_synset_id(fields[0])
            try:
                count = float(fields[1])
            except (IndexError, ValueError):
                count = -1.0
            if synset_id is None or count < 0:
                raise LexiconError(
                    f"{path}:{line_no}: expected '<synset-id> <count>'", path=str(path), line=line_no
                )
            counts[synset_id] = counts.get(synset_id, 0.0) + count
    return counts


def load_lexicon(
    wordnet_dir: Union[str, Path],
    freq_file: Optional[Union[str, Path]],
    *,
    strict: bool = True,
) -> Lexicon:
    """Load noun and verb synsets, their lemma index and frequencies.

    Raises:
        LexiconError: missing file, malformed record, duplicate synset id,
            unresolvable hypernym pointer (when strict) or hypernym cycle.
    """
    directory = Path(wordnet_dir)
    synsets: list[Synset] = []
    lemma_index: dict[tuple[str, str], list[str]] = {}
    for pos, suffix in _POS_FILES.items():
        data_path = directory / f"data.{suffix}"
        for line_no, line in _read_lines(data_path):
            synsets.append(_parse_data_line(line, data_path, line_no))
        index_path = directory / f"index.{suffix}"
        for line_no, line in _read_lines(index_path):
            lemma, ids = _parse_index_line(line, pos[0], index_path, line_no)
            lemma_index[(lemma, pos)] = ids

    if freq_file is None:
        logger.warning("No frequency file given; synsets are ordered by id only")
        frequencies: dict[str, float] = {}
    else:
        frequencies = load_frequencies(freq_file)

    lexicon = Lexicon(synsets, lemma_index, frequencies, strict=strict)
    for (lemma, pos), ids in lexicon.lemma_index.items():
        missing = [sid for sid in ids if sid not in lexicon]
        if missing and strict:
            raise LexiconError(
                f"index entry '{lemma}' ({pos}) points to unknown synsets {missing}", lemma=lemma
            )
    unknown = sum(1 for sid in frequencies if sid not in lexicon)
    if unknown:
        logger.info("Ignoring %d frequency entries for synsets outside nouns and verbs", unknown)
    logger.info(
        "Loaded WordNet from %s: %d synsets, %d lemma entries",
        directory, len(lexicon), len(lexicon.lemma_index),
    )
    return lexicon


# ---------------------------------------------------------------------------
# Chains
# ---------------------------------------------------------------------------
def total_order_key(lexicon: Lexicon, synset_id: str) -> tuple[float, str]:
    """``(ln(1 + count), id)``; distinct synsets never compare equal."""
    lexicon.synset(synset_id)
    return lexicon.rank[synset_id]


def msch(lexicon: Lexicon, synset_id: str) -> HyperonymicChain:
    """Most significant hyperonymic chain starting at ``synset_id``."""
    cached = lexicon.cached_chain(synset_id)
    if cached is not None:
        return cached
    current = lexicon.synset(synset_id)
    chain = [current.id]
    rank = lexicon.rank
    while True:
        parents = [p for p in current.parents if p in lexicon]
        if not parents:
            break
        current = lexicon.synsets[max(parents, key=rank.__getitem__)]
        chain.append(current.id)
    result = HyperonymicChain(tuple(chain))
    lexicon.remember_chain(result)
    return result


def disambiguate(
    lexicon: Lexicon,
    lemma: str,
    pos: WordnetPos,
    context: Iterable[str] = (),
    policy: DisambiguationPolicy = "most_frequent",
) -> Optional[str]:
    """Pick one synset for ``lemma``, or None when it is not in the lexicon.

    ``most_frequent`` takes the candidate with the greatest order key.
    ``context_overlap`` counts context lemmas among each candidate's lemmas
    and falls back to the order key on ties.
    """
    candidates = lexicon.lookup(lemma, pos)
    candidates = tuple(c for c in candidates if c in lexicon)
    if not candidates:
        return None
    if len(candidates) == 1:
        return candidates[0]
    rank = lexicon.rank
    if policy == "most_frequent":
        return max(candidates, key=rank.__getitem__)
    if policy == "context_overlap":
        words = {_lookup_form(w) for w in context}

        def overlap(sid: str) -> tuple[int, tuple[float, str]]:
            synset_words = {_lookup_form(w) for w in lexicon.synsets[sid].lemmas}
            return len(words & synset_words), rank[sid]

        return max(candidates, key=overlap)
    raise ValueError(f"unknown disambiguation policy {policy!r}")


def hyperonymize_word(
    lexicon: Lexicon,
    lemma: str,
    pos: WordnetPos,
    context: Iterable[str],
    n: int,
    policy: DisambiguationPolicy = "most_frequent",
) -> str:
    """First lemma of the n-th synset on the lemma's chain, else the lemma itself."""
    if n == 0:
        return lemma
    synset_id = disambiguate(lexicon, lemma, pos, context, policy)
    if synset_id is None:
        return lemma
    chain = msch(lexicon, synset_id)
    if len(chain) < n + 1:
        return lemma
    return lexicon.synsets[chain[n]].lemmas[0]


class Hyperonymizer:
    """Memoized ``hyperonymize_word`` for one lexicon, order and policy."""

    def __init__(
        self,
        lexicon: Lexicon,
        n: int,
        policy: DisambiguationPolicy = "most_frequent",
        pos_filter: Iterable[str] = ("noun", "verb"),
    ) -> None:
        if n < 0:
            raise ValueError("hyperonymic order must be >= 0")
        self.lexicon = lexicon
        self.n = n
        self.policy = policy
        self.pos_filter = frozenset(pos_filter)
        self._memo: dict[tuple[str, str], str] = {}
        self.items_seen = 0
        self.items_replaced = 0

    @property
    def replaced_fraction(self) -> float:
        return self.items_replaced / self.items_seen if self.items_seen else 0.0

    def word(self, item: Item, context: frozenset[str]) -> str:
        pos = wordnet_pos(item.pos)
        if self.n == 0 or pos is None or pos not in self.pos_filter:
            return item.lemma
        if self.policy == "context_overlap":
            return hyperonymize_word(self.lexicon, item.lemma, pos, context, self.n, self.policy)
        key = (item.lemma, pos)
        replaced = self._memo.get(key)
        if replaced is None:
            replaced = hyperonymize_word(self.lexicon, item.lemma, pos, (), self.n, self.policy)
            self._memo[key] = replaced
        return replaced

    def sentence(self, pruned: PrunedSentence) -> PrunedSentence:
        if self.n == 0:
            return pruned
        items: dict[str, Item] = {}
        for item in pruned.items:
            lemma = self.word(item, pruned.context)
            self.items_seen += 1
            if lemma != item.lemma:
                self.items_replaced += 1
            items.setdefault(lemma, Item(lemma, item.pos))
        return PrunedSentence(pruned.sentence_id, pruned.class_label, tuple(items.values()), pruned.context)

    def corpus(self, pruned: Sequence[PrunedSentence]) -> list[PrunedSentence]:
        return [self.sentence(p) for p in pruned]


def hyperonymize_corpus(
    lexicon: Lexicon,
    pruned: Sequence[PrunedSentence],
    n: int,
    policy: DisambiguationPolicy = "most_frequent",
    pos_filter: Iterable[str] = ("noun", "verb"),
) -> list[PrunedSentence]:
    """Replace every noun/verb item by its n-th order hyperonym; n=0 is the identity."""
    if n == 0:
        return list(pruned)
    return Hyperonymizer(lexicon, n, policy, pos_filter).corpus(pruned)
