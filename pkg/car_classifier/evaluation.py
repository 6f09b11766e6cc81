"""Cross-validation, threshold search and curve sweeps.

``CrossValidator`` shuffles the documents into k folds once and prepares,
for every fold, the training transactions and the pruned held-out
documents; neither depends on the mining thresholds. ``rule_counts`` then
only mines, ``evaluate`` mines and classifies.

``find_optimal`` looks for the thresholds whose mean rule count over the
folds lies within ``tolerance`` of ``target_rules`` and, among those it
probed, keeps the one with the best macro F-measure:

1. at ``min_confidence`` walk ``min_support`` geometrically (times or
   divided by ``sigma_factor``) until the rule count crosses the window,
   then bisect geometrically;
2. if the count jumps over the window, raise ``min_confidence`` in
   ``kappa_step`` steps at the too-many-rules support and bisect when it
   overshoots (lower it instead when even zero support gives too few);
3. around the first in-window point try ``kappa_refine_steps`` confidence
   steps either way, stopping a direction once it leaves the window.

When nothing lands in the window the closest probe is returned and the
report is flagged.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from sklearn.metrics import precision_recall_fscore_support
from sklearn.model_selection import KFold

from .classifier import ClassificationResult, RuleIndex, score_document
from .corpus import Corpus, Document
from .handler_wrappers import DomainError, HandlerError
from .mining import (
    MiningParams,
    PreparedTransactions,
    Strategy,
    apriori,
    build_transactions,
    exact,
    hyperonymizer_for,
    model_from_transactions,
)
from .pruning import PrunedSentence, TfidfStrategy, format_strategy, prune
from .wordnet import DisambiguationPolicy, Lexicon

logger = logging.getLogger(__name__)

SweepAxis = Literal["tfidf_n", "hyper_order"]

# Prediction label for abstentions; never a class, so it only ever counts
# against recall.
_ABSTAIN = "\x00abstain"


class FoldError(HandlerError):
    def __init__(self, message: str, **data: object) -> None:
        super().__init__(message, code="validation_error", **data)


class SearchError(HandlerError):
    def __init__(self, message: str, **data: object) -> None:
        super().__init__(
            message,
            hint="Check that the pruning strategy keeps items in the training folds",
            code="search_failed",
            **data,
        )


class LeakageError(HandlerError):
    def __init__(self, fold: int, doc_ids: Iterable[str]) -> None:
        super().__init__(
            f"fold {fold}: rules were mined from held-out documents",
            code="leakage",
            fold=fold,
            doc_ids=sorted(doc_ids),
        )


class SearchConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    min_support: float = Field(default=0.01, gt=0.0, le=1.0, description="Initial support threshold")
    min_confidence: float = Field(default=0.5, ge=0.0, le=1.0, description="Initial confidence threshold")
    target_rules: int = Field(default=1000, ge=1, description="Target mean rule count")
    tolerance: int = Field(default=2, ge=0, description="Accepted distance from target_rules")
    seed: int = Field(default=42, description="Fold shuffling seed")
    max_probes: int = Field(default=60, ge=1, description="Mining runs the search may spend")
    folds: int = Field(default=10, ge=2)
    sigma_factor: float = Field(default=1.5, gt=1.0)
    kappa_step: float = Field(default=0.02, gt=0.0, le=1.0)
    kappa_refine_steps: int = Field(default=3, ge=0)
    max_itemset_size: int = Field(default=5, ge=1)


# ---------------------------------------------------------------------------
# Partition
# ---------------------------------------------------------------------------
def partition(corpus: Corpus, k: int, seed: int) -> list[list[Document]]:
    """Seeded shuffle of the documents into k contiguous near-equal parts."""
    n = len(corpus)
    if k < 2 or k > n:
        raise FoldError(f"cannot split {n} documents into {k} folds", documents=n, folds=k)
    splitter = KFold(n_splits=k, shuffle=True, random_state=seed)
    return [
        [corpus.documents[i] for i in sorted(test_idx)]
        for _, test_idx in splitter.split(np.arange(n))
    ]


def check_partition(corpus: Corpus, parts: Sequence[Sequence[Document]]) -> None:
    seen: set[str] = set()
    for index, part in enumerate(parts):
        ids = {doc.id for doc in part}
        overlap = seen & ids
        if overlap:
            raise FoldError(f"fold {index} overlaps earlier folds", doc_ids=sorted(overlap))
        seen |= ids
    missing = {doc.id for doc in corpus.documents} - seen
    if missing:
        raise FoldError("folds do not cover the corpus", doc_ids=sorted(missing))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ClassMetrics:
    recall: float
    precision: float
    f_measure: float
    precision_defined: bool = True

    def to_dict(self) -> dict:
        return {
            "recall": self.recall,
            "precision": self.precision,
            "f_measure": self.f_measure,
            "precision_defined": self.precision_defined,
        }


@dataclass(frozen=True)
class FoldReport:
    """Metrics on one held-out fold; classes absent from it map to None."""

    index: int
    per_class: dict[str, Optional[ClassMetrics]]
    rule_count: int
    mean_variety: float
    mean_dispersion: float
    documents: int
    abstentions: int
    avg_transaction_size: float
    replaced_fraction: float

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "per_class": {c: (m.to_dict() if m else None) for c, m in sorted(self.per_class.items())},
            "rule_count": self.rule_count,
            "mean_variety": self.mean_variety,
            "mean_dispersion": self.mean_dispersion,
            "documents": self.documents,
            "abstentions": self.abstentions,
            "avg_transaction_size": self.avg_transaction_size,
            "replaced_fraction": self.replaced_fraction,
        }


@dataclass(frozen=True)
class EvalReport:
    classes: tuple[str, ...]
    per_class: dict[str, ClassMetrics]
    recall: float
    precision: float
    f_measure: float
    rule_count: float
    variety: float
    dispersion: float
    avg_transaction_size: float
    replaced_fraction: float
    min_support: float
    min_confidence: float
    seed: int
    strategy: str
    hyper_n: int
    folds: tuple[FoldReport, ...]
    target_rules: Optional[int] = None
    within_window: Optional[bool] = None
    probes: Optional[int] = None

    @property
    def undefined_precision(self) -> list[tuple[int, str]]:
        """(fold, class) pairs whose class was never predicted."""
        return [
            (fold.index, c)
            for fold in self.folds
            for c, m in sorted(fold.per_class.items())
            if m is not None and not m.precision_defined
        ]

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "per_class": {c: m.to_dict() for c, m in sorted(self.per_class.items())},
            "macro": {"recall": self.recall, "precision": self.precision, "f_measure": self.f_measure},
            "rule_count": self.rule_count,
            "variety": self.variety,
            "dispersion": self.dispersion,
            "avg_transaction_size": self.avg_transaction_size,
            "replaced_fraction": self.replaced_fraction,
            "min_support": self.min_support,
            "min_confidence": self.min_confidence,
            "seed": self.seed,
            "strategy": self.strategy,
            "hyper_n": self.hyper_n,
            "target_rules": self.target_rules,
            "within_window": self.within_window,
            "probes": self.probes,
            "undefined_precision": [list(p) for p in self.undefined_precision],
            "folds": [f.to_dict() for f in self.folds],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def footer(self) -> str:
        return (
            f"MinSupp={self.min_support:.3g}, MinConf={self.min_confidence * 100:.1f}, "
            f"Var.={self.variety:.2f}, Disp.={self.dispersion * 100:.2f}, "
            f"AvgTransSize={self.avg_transaction_size:.2f}"
        )

    def to_tsv(self) -> str:
        """Rows Recall/Precision/F-measure by class plus AVG, then the footer."""
        pct = lambda v: f"{v * 100:.2f}"  # noqa: E731
        lines = ["\t".join(["", *self.classes, "AVG"])]
        for name, attr in (("Recall", "recall"), ("Precision", "precision"), ("F-measure", "f_measure")):
            cells = [pct(getattr(self.per_class[c], attr)) for c in self.classes]
            lines.append("\t".join([name, *cells, pct(getattr(self, attr))]))
        lines.append(self.footer())
        return "\n".join(lines) + "\n"


def fold_metrics(
    docs: Sequence[Document], results: Sequence[ClassificationResult], classes: Sequence[str]
) -> dict[str, Optional[ClassMetrics]]:
    """Per-class recall, precision and F on one fold.

    Abstentions count against recall and never enter a precision
    denominator. A class never predicted gets precision 0, flagged.
    """
    y_true = [doc.class_label for doc in docs]
    y_pred = [r.predicted_class if r.predicted_class is not None else _ABSTAIN for r in results]
    precision, recall, f_measure, support = precision_recall_fscore_support(
        y_true, y_pred, labels=list(classes), zero_division=0
    )
    predicted = set(y_pred)
    metrics: dict[str, Optional[ClassMetrics]] = {}
    for i, c in enumerate(classes):
        if support[i] == 0:
            metrics[c] = None
            continue
        metrics[c] = ClassMetrics(float(recall[i]), float(precision[i]), float(f_measure[i]), c in predicted)
    return metrics


def _mean(values: Sequence[float]) -> float:
    return float(np.mean(values)) if len(values) else 0.0


def aggregate(
    folds: Sequence[FoldReport],
    classes: Sequence[str],
    *,
    min_support: float,
    min_confidence: float,
    seed: int,
    strategy: str,
    hyper_n: int,
) -> EvalReport:
    per_class: dict[str, ClassMetrics] = {}
    for c in classes:
        defined = [f.per_class[c] for f in folds if f.per_class.get(c) is not None]
        per_class[c] = ClassMetrics(
            recall=_mean([m.recall for m in defined]),
            precision=_mean([m.precision for m in defined]),
            f_measure=_mean([m.f_measure for m in defined]),
            precision_defined=all(m.precision_defined for m in defined),
        )
    return EvalReport(
        classes=tuple(classes),
        per_class=per_class,
        recall=_mean([m.recall for m in per_class.values()]),
        precision=_mean([m.precision for m in per_class.values()]),
        f_measure=_mean([m.f_measure for m in per_class.values()]),
        rule_count=_mean([f.rule_count for f in folds]),
        variety=_mean([f.mean_variety for f in folds]),
        dispersion=_mean([f.mean_dispersion for f in folds]),
        avg_transaction_size=_mean([f.avg_transaction_size for f in folds]),
        replaced_fraction=_mean([f.replaced_fraction for f in folds]),
        min_support=min_support,
        min_confidence=min_confidence,
        seed=seed,
        strategy=strategy,
        hyper_n=hyper_n,
        folds=tuple(folds),
    )


# ---------------------------------------------------------------------------
# Cross-validation
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class _PreparedFold:
    index: int
    test_docs: tuple[Document, ...]
    test_pruned: tuple[tuple[PrunedSentence, ...], ...]
    prepared: PreparedTransactions
    test_ids: frozenset[str] = field(default_factory=frozenset)


class CrossValidator:
    """k-fold harness over a fixed corpus, strategy and hyperonymic order."""

    def __init__(
        self,
        corpus: Corpus,
        strategy: Strategy,
        hyper_n: int = 0,
        lexicon: Optional[Lexicon] = None,
        *,
        folds: int = 10,
        seed: int = 42,
        max_itemset_size: int = 5,
        policy: DisambiguationPolicy = "most_frequent",
        pos_filter: Iterable[str] = ("noun", "verb"),
        workers: int = 1,
    ) -> None:
        self.corpus = corpus
        self.strategy = strategy
        self.hyper_n = hyper_n
        self.lexicon = lexicon
        self.seed = seed
        self.max_itemset_size = max_itemset_size
        self.policy: DisambiguationPolicy = policy
        self.pos_filter = tuple(pos_filter)
        self.workers = max(1, workers)
        self.classes = corpus.class_labels
        self.parts = partition(corpus, folds, seed)
        check_partition(corpus, self.parts)
        self._folds = [self._prepare(i, part) for i, part in enumerate(self.parts)]
        self._count_cache: dict[tuple, list[int]] = {}
        self._report_cache: dict[tuple, EvalReport] = {}
        logger.info(
            "Prepared %d folds over %d documents (%s, hyper_n=%d)",
            len(self._folds), len(corpus), format_strategy(strategy), hyper_n,
        )

    @property
    def fold_sizes(self) -> list[int]:
        """Training transactions per fold."""
        return [len(f.prepared.transactions) for f in self._folds]

    def _prepare(self, index: int, test_docs: list[Document]) -> _PreparedFold:
        test_ids = frozenset(doc.id for doc in test_docs)
        train = self.corpus.subset(doc.id for doc in self.corpus.documents if doc.id not in test_ids)
        prepared = build_transactions(
            train, self.strategy, self.hyper_n, self.lexicon, policy=self.policy, pos_filter=self.pos_filter
        )
        hyperonymizer = hyperonymizer_for(self.lexicon, self.hyper_n, self.policy, self.pos_filter)
        test_pruned = []
        for doc in test_docs:
            pruned = prune([(s, None) for s in doc.sentences], self.strategy, prepared.frequencies)
            if hyperonymizer is not None:
                pruned = hyperonymizer.corpus(pruned)
            test_pruned.append(tuple(pruned))
        return _PreparedFold(
            index=index,
            test_docs=tuple(test_docs),
            test_pruned=tuple(test_pruned),
            prepared=prepared,
            test_ids=test_ids,
        )

    def _params(self, min_support: float, min_confidence: float) -> MiningParams:
        return MiningParams(
            min_support=min_support, min_confidence=min_confidence, max_itemset_size=self.max_itemset_size
        )

    def probe_key(self, min_support: float, min_confidence: float) -> tuple:
        """Thresholds that mine identical rule sets on every fold share a key."""
        sigma = exact(min_support)
        covers = tuple(max(1, math.ceil(sigma * n)) for n in self.fold_sizes)
        return covers, exact(min_confidence)

    def _map(self, fn, folds):
        if self.workers == 1:
            return [fn(f) for f in folds]
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(fn, folds))

    def rule_counts(self, min_support: float, min_confidence: float) -> list[int]:
        """Rules mined on each fold's training part."""
        key = self.probe_key(min_support, min_confidence)
        cached = self._count_cache.get(key)
        if cached is None:
            params = self._params(min_support, min_confidence)

            def count(fold: _PreparedFold) -> int:
                if not fold.prepared.transactions:
                    raise DomainError(f"fold {fold.index} has no training transactions")
                return len(apriori(fold.prepared.transactions, params))

            cached = self._map(count, self._folds)
            self._count_cache[key] = cached
        return list(cached)

    def mean_rule_count(self, min_support: float, min_confidence: float) -> float:
        return _mean(self.rule_counts(min_support, min_confidence))

    def is_cached(self, min_support: float, min_confidence: float) -> bool:
        return self.probe_key(min_support, min_confidence) in self._count_cache

    def _run_fold(self, fold: _PreparedFold, params: MiningParams) -> FoldReport:
        model = model_from_transactions(
            fold.prepared,
            params,
            self.strategy,
            self.hyper_n,
            classes=self.classes,
            policy=self.policy,
            pos_filter=self.pos_filter,
        )
        leaked = model.training_doc_ids & fold.test_ids
        if leaked:
            raise LeakageError(fold.index, leaked)
        index = RuleIndex(model.rules)
        results = [
            score_document(index, pruned, self.classes, doc.id)
            for doc, pruned in zip(fold.test_docs, fold.test_pruned)
        ]
        return FoldReport(
            index=fold.index,
            per_class=fold_metrics(fold.test_docs, results, self.classes),
            rule_count=model.rule_count,
            mean_variety=_mean([r.variety for r in results]),
            mean_dispersion=_mean([r.dispersion for r in results]),
            documents=len(results),
            abstentions=sum(1 for r in results if r.abstained),
            avg_transaction_size=fold.prepared.avg_transaction_size,
            replaced_fraction=fold.prepared.replaced_fraction,
        )

    def evaluate(self, min_support: float, min_confidence: float) -> EvalReport:
        """Mine every fold, classify its held-out documents and average."""
        key = (min_support, min_confidence)
        cached = self._report_cache.get(key)
        if cached is not None:
            return cached
        params = self._params(min_support, min_confidence)
        folds = self._map(lambda f: self._run_fold(f, params), self._folds)
        report = aggregate(
            folds,
            self.classes,
            min_support=min_support,
            min_confidence=min_confidence,
            seed=self.seed,
            strategy=format_strategy(self.strategy),
            hyper_n=self.hyper_n,
        )
        self._report_cache[key] = report
        logger.info(
            "sigma=%s kappa=%s: rho=%.1f F=%.4f", min_support, min_confidence, report.rule_count, report.f_measure
        )
        return report


def single_evaluate(
    corpus: Corpus,
    min_support: float,
    min_confidence: float,
    strategy: Strategy,
    hyper_n: int = 0,
    lexicon: Optional[Lexicon] = None,
    seed: int = 42,
    **kwargs,
) -> EvalReport:
    return CrossValidator(corpus, strategy, hyper_n, lexicon, seed=seed, **kwargs).evaluate(
        min_support, min_confidence
    )


# ---------------------------------------------------------------------------
# Threshold search
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Probe:
    min_support: float
    min_confidence: float
    rule_count: Optional[float]

    def to_dict(self) -> dict:
        return {"min_support": self.min_support, "min_confidence": self.min_confidence, "rule_count": self.rule_count}


@dataclass(frozen=True)
class SearchOutcome:
    min_support: float
    min_confidence: float
    rule_count: float
    within_window: bool
    probes: tuple[Probe, ...]
    report: EvalReport


class _BudgetExhausted(Exception):
    pass


class _Search:
    """State of one threshold search; mining runs are the budget."""

    def __init__(self, validator: CrossValidator, config: SearchConfig) -> None:
        self.validator = validator
        self.config = config
        self.probes: list[Probe] = []
        self._seen: dict[tuple[float, float], Optional[float]] = {}
        self._runs = 0
        self._steps = 0
        sizes = [n for n in validator.fold_sizes if n]
        self.sigma_floor = 1.0 / max(sizes) if sizes else 0.0

    # -- probing --------------------------------------------------------------
    def count(self, sigma: float, kappa: float) -> Optional[float]:
        sigma = min(max(sigma, 0.0), 1.0)
        kappa = round(min(max(kappa, 0.0), 1.0), 10)
        pair = (sigma, kappa)
        if pair in self._seen:
            return self._seen[pair]
        self._steps += 1
        if self._steps > 4 * self.config.max_probes:
            raise _BudgetExhausted
        if not self.validator.is_cached(sigma, kappa):
            if self._runs >= self.config.max_probes:
                raise _BudgetExhausted
            self._runs += 1
        try:
            rho: Optional[float] = self.validator.mean_rule_count(sigma, kappa)
        except DomainError as exc:
            logger.warning("Probe sigma=%s kappa=%s failed: %s", sigma, kappa, exc.message)
            rho = None
        self._seen[pair] = rho
        self.probes.append(Probe(sigma, kappa, rho))
        logger.debug("probe sigma=%.6g kappa=%.4f -> rho=%s", sigma, kappa, rho)
        return rho

    def side(self, rho: Optional[float]) -> int:
        """-1 too few rules, 0 in window, +1 too many."""
        if rho is None:
            return -1
        target, tol = self.config.target_rules, self.config.tolerance
        if abs(rho - target) <= tol:
            return 0
        return 1 if rho > target else -1

    # -- phases ---------------------------------------------------------------
    def bracket_sigma(self, kappa: float) -> tuple[float, float, Optional[tuple[float, float]]]:
        """Return (sigma_many, sigma_few, hit); the sigmas bound the window."""
        factor = self.config.sigma_factor
        sigma = self.config.min_support
        s = self.side(self.count(sigma, kappa))
        if s == 0:
            return sigma, sigma, (sigma, kappa)
        if s > 0:
            many = sigma
            while True:
                sigma = min(1.0, sigma * factor)
                s = self.side(self.count(sigma, kappa))
                if s == 0:
                    return many, sigma, (sigma, kappa)
                if s < 0:
                    return many, sigma, None
                many = sigma
                if sigma >= 1.0:
                    return many, math.inf, None
        few = sigma
        while True:
            sigma = sigma / factor
            if sigma < self.sigma_floor:
                sigma = 0.0
            s = self.side(self.count(sigma, kappa))
            if s == 0:
                return sigma, few, (sigma, kappa)
            if s > 0:
                return sigma, few, None
            few = sigma
            if sigma == 0.0:
                return -math.inf, few, None

    def bisect_sigma(self, many: float, few: float, kappa: float) -> tuple[float, float, Optional[tuple[float, float]]]:
        while few - many > 1e-12 and (many == 0.0 or few / many > 1 + 1e-9):
            mid = math.sqrt(many * few) if many > 0 else few / 2
            s = self.side(self.count(mid, kappa))
            if s == 0:
                return many, few, (mid, kappa)
            if s > 0:
                many = mid
            else:
                few = mid
        return many, few, None

    def walk_kappa(self, sigma: float, kappa: float, direction: int) -> Optional[tuple[float, float]]:
        """Move confidence by kappa_step from ``kappa`` until the window is reached or crossed."""
        step = self.config.kappa_step * direction
        start_side = self.side(self.count(sigma, kappa))
        current = kappa
        while True:
            nxt = min(1.0, max(0.0, current + step))
            if nxt == current:
                return None
            s = self.side(self.count(sigma, nxt))
            if s == 0:
                return sigma, nxt
            if s != start_side:
                lo, hi = sorted((current, nxt))
                return self.bisect_kappa(sigma, lo, hi)
            current = nxt

    def bisect_kappa(self, sigma: float, lo: float, hi: float) -> Optional[tuple[float, float]]:
        # More rules at lo than at hi.
        while hi - lo > 1e-6:
            mid = (lo + hi) / 2
            s = self.side(self.count(sigma, mid))
            if s == 0:
                return sigma, mid
            if s > 0:
                lo = mid
            else:
                hi = mid
        return None

    def refine(self, sigma: float, kappa: float) -> None:
        for direction in (1, -1):
            for j in range(1, self.config.kappa_refine_steps + 1):
                candidate = kappa + direction * j * self.config.kappa_step
                if not 0.0 <= candidate <= 1.0:
                    break
                if self.side(self.count(sigma, candidate)) != 0:
                    break

    def run(self) -> None:
        kappa0 = self.config.min_confidence
        try:
            many, few, hit = self.bracket_sigma(kappa0)
            if hit is None and math.isfinite(many) and math.isfinite(few):
                many, few, hit = self.bisect_sigma(many, few, kappa0)
            if hit is None and math.isfinite(many):
                hit = self.walk_kappa(many, kappa0, +1)
            if hit is None and many == -math.inf:
                hit = self.walk_kappa(0.0, kappa0, -1)
            if hit is not None:
                self.refine(*hit)
        except _BudgetExhausted:
            logger.warning("Threshold search stopped after %d mining runs", self._runs)


def find_optimal(
    corpus: Corpus,
    config: SearchConfig,
    strategy: Strategy,
    hyper_n: int = 0,
    lexicon: Optional[Lexicon] = None,
    *,
    validator: Optional[CrossValidator] = None,
    **kwargs,
) -> SearchOutcome:
    """Thresholds whose mean rule count is closest to the target, best F first.

    Raises:
        SearchError: no probe mined successfully.
    """
    if validator is None:
        validator = CrossValidator(
            corpus, strategy, hyper_n, lexicon,
            folds=config.folds, seed=config.seed, max_itemset_size=config.max_itemset_size, **kwargs,
        )
    search = _Search(validator, config)
    search.run()

    successful = [p for p in search.probes if p.rule_count is not None]
    if not successful:
        raise SearchError("no threshold probe mined successfully", probes=len(search.probes))
    in_window = [p for p in successful if search.side(p.rule_count) == 0]
    if in_window:
        best, best_report = None, None
        for probe in in_window:
            report = validator.evaluate(probe.min_support, probe.min_confidence)
            if best_report is None or report.f_measure > best_report.f_measure:
                best, best_report = probe, report
        within = True
    else:
        target = config.target_rules
        best = min(successful, key=lambda p: abs(p.rule_count - target))
        best_report = validator.evaluate(best.min_support, best.min_confidence)
        within = False
        logger.warning(
            "No probe within %d of %d rules; closest has %.1f rules", config.tolerance, target, best.rule_count
        )
    assert best is not None and best_report is not None
    report = _with_search(best_report, config, within, len(search.probes))
    return SearchOutcome(
        min_support=best.min_support,
        min_confidence=best.min_confidence,
        rule_count=best.rule_count,
        within_window=within,
        probes=tuple(search.probes),
        report=report,
    )


def _with_search(report: EvalReport, config: SearchConfig, within: bool, probes: int) -> EvalReport:
    return replace(report, target_rules=config.target_rules, within_window=within, probes=probes)


def evaluate(
    corpus: Corpus,
    config: SearchConfig,
    strategy: Strategy,
    hyper_n: int = 0,
    lexicon: Optional[Lexicon] = None,
    **kwargs,
) -> EvalReport:
    """Search thresholds, then report the cross-validation at the chosen ones."""
    return find_optimal(corpus, config, strategy, hyper_n, lexicon, **kwargs).report


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class CurveRow:
    x: int
    recall: float
    precision: float
    f_measure: float
    variety: float
    dispersion: float
    rule_count: float
    avg_transaction_size: float
    replaced_fraction: float
    min_support: float
    min_confidence: float
    within_window: bool
    per_class_f: dict[str, float]

    @classmethod
    def from_report(cls, x: int, report: EvalReport) -> CurveRow:
        return cls(
            x=x,
            recall=report.recall,
            precision=report.precision,
            f_measure=report.f_measure,
            variety=report.variety,
            dispersion=report.dispersion,
            rule_count=report.rule_count,
            avg_transaction_size=report.avg_transaction_size,
            replaced_fraction=report.replaced_fraction,
            min_support=report.min_support,
            min_confidence=report.min_confidence,
            within_window=bool(report.within_window),
            per_class_f={c: m.f_measure for c, m in report.per_class.items()},
        )

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "recall": self.recall,
            "precision": self.precision,
            "f_measure": self.f_measure,
            "variety": self.variety,
            "dispersion": self.dispersion,
            "rule_count": self.rule_count,
            "avg_transaction_size": self.avg_transaction_size,
            "replaced_fraction": self.replaced_fraction,
            "min_support": self.min_support,
            "min_confidence": self.min_confidence,
            "within_window": self.within_window,
            "per_class_f": dict(sorted(self.per_class_f.items())),
        }


def sweep(
    corpus: Corpus,
    config: SearchConfig,
    strategy: Strategy,
    axis: SweepAxis,
    values: Iterable[int],
    hyper_n: int = 0,
    lexicon: Optional[Lexicon] = None,
    **kwargs,
) -> list[CurveRow]:
    """Run ``evaluate`` once per value of ``axis`` and collect one row each."""
    rows = []
    for x in values:
        if axis == "tfidf_n":
            row_strategy: Strategy = TfidfStrategy(n=x)
            row_hyper_n = hyper_n
        elif axis == "hyper_order":
            row_strategy, row_hyper_n = strategy, x
        else:
            raise FoldError(f"unknown sweep axis '{axis}'", axis=axis)
        logger.info("Sweep %s=%d", axis, x)
        report = evaluate(corpus, config, row_strategy, row_hyper_n, lexicon, **kwargs)
        rows.append(CurveRow.from_report(x, report))
    return rows


_CURVE_COLUMNS = (
    "x", "recall", "precision", "f_measure", "variety", "dispersion", "rule_count",
    "avg_transaction_size", "replaced_fraction", "min_support", "min_confidence", "within_window",
)


def curve_to_tsv(rows: Sequence[CurveRow]) -> str:
    classes = sorted({c for row in rows for c in row.per_class_f})
    lines = ["\t".join([*_CURVE_COLUMNS, *(f"f_measure:{c}" for c in classes)])]
    for row in rows:
        d = row.to_dict()
        cells = [str(d[col]).lower() if isinstance(d[col], bool) else repr(d[col]) for col in _CURVE_COLUMNS]
        cells += [repr(row.per_class_f.get(c, 0.0)) for c in classes]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def curve_to_json(rows: Sequence[CurveRow]) -> str:
    return json.dumps([row.to_dict() for row in rows], indent=2, sort_keys=True) + "\n"
