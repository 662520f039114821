"""phasekit: a modeling language and static-analysis toolchain for
STPA-style hazard analyses of AI systems.

Authors write losses, hazards, control structures, unsafe control actions,
and loss scenarios in the ``.phase`` text format; this package parses and
validates them, computes coverage and traceability, flags structural causal
factors, renders control diagrams, and diffs model versions over time.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .analysis import (
    AccountabilityReport,
    AnalysisBundle,
    CellState,
    CoverageCell,
    CoverageMatrix,
    CoverageRow,
    Hint,
    HintCode,
    Metrics,
    TraceTree,
    analyze,
    coverage,
    hierarchy_ranks,
    hints,
    metrics,
    trace_loss,
    trace_node,
    validate,
)
from .diagnostics import Diagnostic, Severity, Span
from .diff import (
    ChangeSet,
    DanglingReport,
    FieldChange,
    ImpactEntry,
    ImpactReport,
    ModifiedElement,
    diff,
    impact,
)
from .dsl import ParseResult, parse, parse_file, serialize
from .export import (
    RenderOptions,
    coverage_csv,
    coverage_json,
    report_json,
    report_markdown,
    to_dot,
)
from .model import (
    GUIDE_TYPES,
    Assessment,
    BoundaryStage,
    Edge,
    EdgeKind,
    GuideType,
    Hazard,
    Loss,
    LossCategory,
    LossScenario,
    Model,
    Node,
    NodeKind,
    Ref,
    SafetyRequirement,
    ScenarioClass,
    SystemBoundary,
    Uca,
    UcaCategory,
    UnknownReferenceError,
    elements_in_boundary,
    lookup,
)

__all__ = [
    "AccountabilityReport",
    "AnalysisBundle",
    "Assessment",
    "BoundaryStage",
    "CellState",
    "ChangeSet",
    "CoverageCell",
    "CoverageMatrix",
    "CoverageRow",
    "DanglingReport",
    "Diagnostic",
    "Edge",
    "EdgeKind",
    "FieldChange",
    "GUIDE_TYPES",
    "GuideType",
    "Hazard",
    "Hint",
    "HintCode",
    "ImpactEntry",
    "ImpactReport",
    "Loss",
    "LossCategory",
    "LossScenario",
    "Metrics",
    "Model",
    "ModifiedElement",
    "Node",
    "NodeKind",
    "ParseResult",
    "Ref",
    "RenderOptions",
    "SafetyRequirement",
    "ScenarioClass",
    "Severity",
    "Span",
    "SystemBoundary",
    "TraceTree",
    "Uca",
    "UcaCategory",
    "UnknownReferenceError",
    "analyze",
    "coverage",
    "coverage_csv",
    "coverage_json",
    "diff",
    "elements_in_boundary",
    "hierarchy_ranks",
    "hints",
    "impact",
    "lookup",
    "metrics",
    "parse",
    "parse_file",
    "report_json",
    "report_markdown",
    "serialize",
    "to_dot",
    "trace_loss",
    "trace_node",
    "validate",
]
