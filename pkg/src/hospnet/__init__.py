"""Hospitalization-record analytics: overlap taxonomy, facility statistics,
and transfer-network derivation, with a synthetic ground-truth generator."""

__version__ = "0.1.0"

from .records import (  # noqa: F401
    Dataset,
    IngestReport,
    Record,
    Sex,
    State,
    ValidatedRecord,
    Window,
    load_dataset,
)
from .overlaps import OverlapGroup, OverlapKind  # noqa: F401
