"""Decision-tree engine for guideline-driven consultations.

The package bundles a validated tree model, a navigation state machine,
a focus-dependent layout, data-driven automatic navigation, a scoring
and comparison harness for simulation trials, and an HTTP service.
"""

__version__ = "0.1.0"

from .model import (
    Edge,
    EdgeSymbol,
    Node,
    NodeKind,
    TreeDef,
    UnknownNodeError,
    ValidationIssue,
    validate_tree,
)
from .navigation import NavState, Navigator, UnreachableError
from .predicates import (
    DataPredicate,
    FieldDef,
    FieldType,
    PatientRecord,
    Quantity,
    Truth,
    TypeMismatchError,
    eval_predicate,
)

__all__ = [
    "DataPredicate",
    "Edge",
    "EdgeSymbol",
    "FieldDef",
    "FieldType",
    "NavState",
    "Navigator",
    "Node",
    "NodeKind",
    "PatientRecord",
    "Quantity",
    "TreeDef",
    "Truth",
    "TypeMismatchError",
    "UnknownNodeError",
    "UnreachableError",
    "ValidationIssue",
    "eval_predicate",
    "validate_tree",
]
