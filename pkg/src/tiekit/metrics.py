"""Scoring for timex, event and tlink identification and tlink classification.

Inputs are mappings from document name to :class:`~tiekit.model.Document`,
gold on one side and predictions on the other. A document missing from the
predictions is scored as an empty prediction; a prediction for a document
missing from the gold is an error.
"""

from __future__ import annotations

import enum
import logging
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from tiekit.model import Document, EntityKind, TLink
from tiekit.timegraph import (
    IncrementalTimegraph,
    InconsistencyError,
    Timegraph,
    _find_witness,
    _is_consistent,
    _ordered,
    canonical_tlink,
)

log = logging.getLogger(__name__)

__all__ = [
    "EvaluationError",
    "Kind",
    "Matching",
    "Policy",
    "Scores",
    "IdentificationReport",
    "ClassificationReport",
    "AwarenessEntry",
    "AwarenessReport",
    "identification_scores",
    "classification_scores",
    "temporal_awareness",
    "awareness_scores",
    "resolve_inconsistencies",
    "prf",
]


class EvaluationError(ValueError):
    pass


class Kind(enum.Enum):
    TIMEX = "Timex"
    EVENT = "Event"
    TLINK_PAIR = "TLinkPair"


class Matching(enum.Enum):
    STRICT = "Strict"
    RELAXED = "Relaxed"


class Policy(enum.Enum):
    DROP_GREEDY = "DropGreedy"
    FAIL_HARD = "FailHard"


def _ratio(num: int, den: int, other_empty: bool) -> float:
    # empty vs empty is perfect; empty vs non-empty scores zero
    if den:
        return num / den
    return 1.0 if other_empty else 0.0


def _harmonic(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


@dataclass(frozen=True)
class Scores:
    precision: float
    recall: float
    f1: float

    def as_dict(self) -> dict[str, float]:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


def prf(tp: int, fp: int, fn: int) -> Scores:
    p = _ratio(tp, tp + fp, other_empty=tp + fn == 0)
    r = _ratio(tp, tp + fn, other_empty=tp + fp == 0)
    return Scores(p, r, _harmonic(p, r))


def _check_keys(annotations: Mapping, predictions: Mapping):
    extra = sorted(set(predictions) - set(annotations))
    if extra:
        raise EvaluationError(f"predictions for documents not in the annotations: {', '.join(extra)}")


# -- identification ----------------------------------------------------------


@dataclass
class IdentificationReport:
    micro: Scores
    macro: Scores
    counts: dict[str, dict[str, int]]
    skipped: int = 0

    def as_dict(self) -> dict:
        return {
            "micro": self.micro.as_dict(),
            "macro": self.macro.as_dict(),
            "documents": self.counts,
            "skipped_spanless": self.skipped,
        }


def _overlaps(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return a[0] < b[1] and b[0] < a[1]


def _match_spans(gold: set, pred: set, matching: Matching) -> int:
    if matching is Matching.STRICT:
        return len(gold & pred)
    free = sorted(gold)
    tp = 0
    for span in sorted(pred):
        for i, g in enumerate(free):
            if _overlaps(span, g):
                del free[i]
                tp += 1
                break
    return tp


def _items(doc: Document | None, kind: Kind) -> tuple[set, int]:
    if doc is None:
        return set(), 0
    if kind is Kind.TLINK_PAIR:
        return {tl.pair for tl in doc.tlinks}, 0
    want = EntityKind.TIMEX if kind is Kind.TIMEX else EntityKind.EVENT
    spans, skipped = set(), 0
    for ent in doc.entities:
        if ent.kind is not want:
            continue
        if ent.span is None:
            skipped += 1
        else:
            spans.add(ent.span)
    return spans, skipped


def identification_scores(
    annotations: Mapping[str, Document],
    predictions: Mapping[str, Document],
    kind: Kind | str = Kind.EVENT,
    matching: Matching | str = Matching.STRICT,
) -> IdentificationReport:
    """Precision/recall/F1 of timex or event spans, or of unordered tlink pairs.

    ``Relaxed`` matching counts any overlap, pairing each gold span at most
    once in order of position. Entities without a span cannot be matched and
    are only counted in ``skipped``.
    """
    kind, matching = Kind(kind), Matching(matching)
    _check_keys(annotations, predictions)
    counts: dict[str, dict[str, int]] = {}
    per_doc: list[Scores] = []
    tp_all = fp_all = fn_all = skipped = 0
    for name in sorted(annotations):
        gold, gs = _items(annotations[name], kind)
        pred, ps = _items(predictions.get(name), kind)
        skipped += gs + ps
        if kind is Kind.TLINK_PAIR:
            tp = len(gold & pred)
        else:
            tp = _match_spans(gold, pred, matching)
        fp, fn = len(pred) - tp, len(gold) - tp
        counts[name] = {"tp": tp, "fp": fp, "fn": fn}
        per_doc.append(prf(tp, fp, fn))
        tp_all, fp_all, fn_all = tp_all + tp, fp_all + fp, fn_all + fn
    if skipped:
        log.warning("%d entities without spans were skipped", skipped)
    micro = prf(tp_all, fp_all, fn_all)
    if per_doc:
        mp = sum(s.precision for s in per_doc) / len(per_doc)
        mr = sum(s.recall for s in per_doc) / len(per_doc)
        macro = Scores(mp, mr, _harmonic(mp, mr))
    else:
        macro = micro
    return IdentificationReport(micro, macro, counts, skipped)


# -- classification ------------------------------------------------------------


def relation_label(tl: TLink) -> str:
    """Name of the relation after canonical orientation, e.g. ``"before"``."""
    rel = canonical_tlink(tl.source, tl.target, tl.relation).relation
    interval = rel.interval
    return interval.value if interval else str(rel.point)


@dataclass
class ClassificationReport:
    micro: Scores
    accuracy: float
    per_label: dict[str, Scores]
    correct: int
    gold_pairs: int
    predicted_pairs: int
    spurious: int

    def as_dict(self) -> dict:
        return {
            "micro": self.micro.as_dict(),
            "accuracy": self.accuracy,
            "per_label": {k: v.as_dict() for k, v in sorted(self.per_label.items())},
            "correct": self.correct,
            "gold_pairs": self.gold_pairs,
            "predicted_pairs": self.predicted_pairs,
            "spurious": self.spurious,
        }


def classification_scores(
    annotations: Mapping[str, Document],
    predictions: Mapping[str, Document],
) -> ClassificationReport:
    """Score predicted relations against gold relations pair by pair.

    A prediction counts as correct when its relation matches the gold relation
    for the same unordered entity pair, after flipping it to the gold link's
    orientation. Predicted pairs with no gold link are ``spurious`` and excluded
    from the per-label denominators.
    """
    _check_keys(annotations, predictions)
    gold_n: Counter[str] = Counter()
    pred_n: Counter[str] = Counter()
    hit_n: Counter[str] = Counter()
    spurious = correct = gold_total = pred_total = 0
    for name in sorted(annotations):
        gold: dict[frozenset, TLink] = {}
        for tl in annotations[name].tlinks:
            if tl.pair in gold:
                log.warning("%s: several gold tlinks for %s, keeping the first", name, sorted(tl.pair))
                continue
            gold[tl.pair] = tl
        gold_total += len(gold)
        for tl in gold.values():
            gold_n[relation_label(tl)] += 1
        pred_doc = predictions.get(name)
        seen: set[frozenset] = set()
        for tl in pred_doc.tlinks if pred_doc else ():
            if tl.pair in seen:
                raise EvaluationError(f"{name}: duplicate predictions for pair {tuple(sorted(tl.pair))}")
            seen.add(tl.pair)
            ref = gold.get(tl.pair)
            if ref is None:
                spurious += 1
                continue
            pred_total += 1
            pred_n[relation_label(tl)] += 1
            if tl.oriented(ref.source).relation == ref.relation:
                correct += 1
                hit_n[relation_label(ref)] += 1
    per_label = {
        label: prf(hit_n[label], pred_n[label] - hit_n[label], gold_n[label] - hit_n[label])
        for label in set(gold_n) | set(pred_n)
    }
    micro = prf(correct, pred_total - correct, gold_total - correct)
    accuracy = _ratio(correct, gold_total, other_empty=pred_total == 0)
    return ClassificationReport(micro, accuracy, per_label, correct, gold_total, pred_total, spurious)


# -- consistency repair and temporal awareness ----------------------------------


def resolve_inconsistencies(
    pred: Iterable[TLink], policy: Policy | str = Policy.DROP_GREEDY
) -> tuple[list[TLink], int]:
    """Make a set of predicted tlinks consistent.

    Links are considered in document order (sets are sorted by source and
    target id). ``DropGreedy`` keeps each link unless it contradicts those
    already kept; ``FailHard`` raises :class:`InconsistencyError` instead.
    """
    policy = Policy(policy)
    links = _ordered(pred)
    if _is_consistent(links):
        return links, 0
    if policy is Policy.FAIL_HARD:
        raise InconsistencyError(_find_witness(links))
    graph = IncrementalTimegraph()
    dropped = sum(not graph.add(tl) for tl in links)
    return graph.tlinks, dropped


@dataclass
class AwarenessEntry:
    precision_num: int
    precision_den: int
    recall_num: int
    recall_den: int
    dropped: int = 0
    spurious: int = 0

    @property
    def temporal_precision(self) -> float:
        return _ratio(self.precision_num, self.precision_den, other_empty=self.recall_den == 0)

    @property
    def temporal_recall(self) -> float:
        return _ratio(self.recall_num, self.recall_den, other_empty=self.precision_den == 0)

    @property
    def tf1(self) -> float:
        return _harmonic(self.temporal_precision, self.temporal_recall)

    def __add__(self, other: AwarenessEntry) -> AwarenessEntry:
        return AwarenessEntry(
            self.precision_num + other.precision_num,
            self.precision_den + other.precision_den,
            self.recall_num + other.recall_num,
            self.recall_den + other.recall_den,
            self.dropped + other.dropped,
            self.spurious + other.spurious,
        )

    def as_dict(self) -> dict:
        return {
            "temporal_precision": self.temporal_precision,
            "temporal_recall": self.temporal_recall,
            "tf1": self.tf1,
            "precision_num": self.precision_num,
            "precision_den": self.precision_den,
            "recall_num": self.recall_num,
            "recall_den": self.recall_den,
            "dropped": self.dropped,
            "spurious": self.spurious,
        }


def temporal_awareness(
    gold: Iterable[TLink],
    pred: Iterable[TLink],
    policy: Policy | str = Policy.DROP_GREEDY,
    entities: Iterable[str] | None = None,
) -> AwarenessEntry:
    """Closure-based precision and recall of predicted tlinks.

    Precision is the share of the reduced prediction graph entailed by the
    gold closure; recall is the share of the reduced gold graph entailed by
    the prediction closure. Predictions are repaired with ``policy`` first.
    Predicted links touching entities outside ``entities`` (default: those in
    the gold links) cannot be verified and are only counted as spurious.
    """
    gold_graph = Timegraph(gold)
    known = set(entities) if entities is not None else set(gold_graph.entities)
    candidates, spurious = [], 0
    for tl in _ordered(pred):
        if tl.source in known and tl.target in known:
            candidates.append(tl)
        else:
            spurious += 1
    kept, dropped = resolve_inconsistencies(candidates, policy)
    pred_graph = Timegraph(kept)
    reduced_pred = pred_graph.reduction()
    reduced_gold = gold_graph.reduction()
    return AwarenessEntry(
        sum(gold_graph.entails(tl) for tl in reduced_pred),
        len(reduced_pred),
        sum(pred_graph.entails(tl) for tl in reduced_gold),
        len(reduced_gold),
        dropped,
        spurious,
    )


@dataclass
class AwarenessReport:
    total: AwarenessEntry
    documents: dict[str, AwarenessEntry] = field(default_factory=dict)

    @property
    def temporal_precision(self) -> float:
        return self.total.temporal_precision

    @property
    def temporal_recall(self) -> float:
        return self.total.temporal_recall

    @property
    def tf1(self) -> float:
        return self.total.tf1

    @property
    def inconsistencies(self) -> dict[str, int]:
        return {name: e.dropped for name, e in self.documents.items() if e.dropped}

    def as_dict(self) -> dict:
        out = self.total.as_dict()
        out["inconsistencies"] = self.inconsistencies
        out["documents"] = {name: e.as_dict() for name, e in self.documents.items()}
        return out


def awareness_scores(
    annotations: Mapping[str, Document],
    predictions: Mapping[str, Document],
    policy: Policy | str = Policy.DROP_GREEDY,
) -> AwarenessReport:
    """Temporal awareness pooled over documents (micro)."""
    _check_keys(annotations, predictions)
    total = AwarenessEntry(0, 0, 0, 0)
    docs = {}
    for name in sorted(annotations):
        gold_doc = annotations[name]
        pred_doc = predictions.get(name)
        try:
            entry = temporal_awareness(
                gold_doc.tlinks,
                pred_doc.tlinks if pred_doc else (),
                policy,
                entities=[e.id for e in gold_doc.entities],
            )
        except InconsistencyError as exc:
            raise InconsistencyError(exc.witness, f"{name}: {exc}") from None
        docs[name] = entry
        total += entry
    return AwarenessReport(total, docs)


def evaluation_input(documents: Sequence[Document] | Mapping[str, Document]) -> dict[str, Document]:
    if isinstance(documents, Mapping):
        return dict(documents)
    return {doc.name: doc for doc in documents}
