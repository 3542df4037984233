"""Toolkit for temporal information extraction corpora, reasoning and evaluation."""

from tiekit.model import Dataset, Document, Entity, EntityKind, TLink, dataset_stats, entity_by_id
from tiekit.relations import (
    IntervalRelation,
    PointOrder,
    PointRelation,
    RelationConvention,
    TemporalRelation,
    parse_relation,
)
from tiekit.timegraph import Timegraph, check_consistency, temporal_closure, temporal_reduction

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "Document",
    "Entity",
    "EntityKind",
    "TLink",
    "dataset_stats",
    "entity_by_id",
    "IntervalRelation",
    "PointOrder",
    "PointRelation",
    "RelationConvention",
    "TemporalRelation",
    "parse_relation",
    "Timegraph",
    "check_consistency",
    "temporal_closure",
    "temporal_reduction",
]
