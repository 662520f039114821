"""Core data model for PHASE hazard-analysis documents.

A :class:`Model` is an immutable registry of losses, system boundaries,
hazards, control-structure nodes and edges, unsafe control actions, loss
scenarios, safety requirements, and assessments. Identifiers are namespaced
per element class, so a loss and a hazard may share the same id text without
conflict.

Models never mutate after construction; every operation in this package is a
pure function of its inputs. Cross-references are plain id strings and are
checked by :func:`phasekit.analysis.validate`, not at construction time, so a
partially written document can still be parsed and explored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Union

from .diagnostics import Span

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_-]*")


def is_valid_identifier(text: str) -> bool:
    """True if ``text`` is a legal element id: a letter followed by letters,
    digits, ``_`` or ``-``."""
    return bool(_IDENT_RE.fullmatch(text))


class LossCategory(str, Enum):
    SAFETY_CRITICAL = "safety-critical"
    PERFORMANCE_RELATED = "performance-related"
    SOCIOTECHNICAL = "sociotechnical"


class BoundaryStage(str, Enum):
    DATA_COLLECTION = "data-collection"
    MODEL_DEVELOPMENT = "model-development"
    USE_OPERATION = "use-operation"
    OTHER = "other"


class NodeKind(str, Enum):
    HUMAN = "human"
    TEAM = "team"
    ORGANIZATION = "organization"
    TECHNICAL_ARTIFACT = "technical-artifact"
    AI_MODEL = "ai-model"
    AUTOMATED_SYSTEM = "automated-system"


class EdgeKind(str, Enum):
    CONTROL_ACTION = "control-action"
    FEEDBACK = "feedback"
    IO_LINK = "io-link"


class GuideType(str, Enum):
    PROVIDED = "provided"
    NOT_PROVIDED = "not-provided"
    WRONG_TIMING = "wrong-timing"
    STOPPED_TOO_SOON_APPLIED_TOO_LONG = "stopped-too-soon-applied-too-long"


#: Canonical guide-type order used by coverage columns and exports.
GUIDE_TYPES: tuple[GuideType, ...] = (
    GuideType.PROVIDED,
    GuideType.NOT_PROVIDED,
    GuideType.WRONG_TIMING,
    GuideType.STOPPED_TOO_SOON_APPLIED_TOO_LONG,
)


class UcaCategory(str, Enum):
    FUNCTIONAL = "functional"
    DESIGN_OR_MISUSE = "design-or-misuse"
    COMMUNICATION_COORDINATION = "communication-coordination"


class ScenarioClass(str, Enum):
    ORGANIZATIONAL = "organizational"
    INTERACTION = "interaction"
    TECHNICAL = "technical"


#: The only verdict an assessment may record.
NOT_HAZARDOUS = "not-hazardous"


@dataclass(frozen=True)
class Loss:
    id: str
    description: str
    category: LossCategory


@dataclass(frozen=True)
class SystemBoundary:
    id: str
    name: str
    stage: BoundaryStage | None = None
    includes: tuple[str, ...] = ()


@dataclass(frozen=True)
class Hazard:
    id: str
    description: str
    boundary: str
    leads_to: tuple[str, ...]


@dataclass(frozen=True)
class Node:
    id: str
    name: str
    kind: NodeKind
    process_model: str | None = None
    control_algorithm: str | None = None


@dataclass(frozen=True)
class Edge:
    id: str
    kind: EdgeKind
    source: str
    target: str
    label: str


@dataclass(frozen=True)
class Uca:
    """A five-part unsafe control action.

    ``source`` always names the node that issues the referenced action; the
    parser derives it from the action edge, so it only diverges on models
    assembled programmatically (validate reports the mismatch).
    """

    id: str
    source: str
    action: str
    guide_type: GuideType
    category: UcaCategory
    context: str
    hazards: tuple[str, ...]


@dataclass(frozen=True)
class LossScenario:
    id: str
    uca: str
    scenario_class: ScenarioClass
    description: str
    elements: tuple[str, ...] = ()


@dataclass(frozen=True)
class SafetyRequirement:
    id: str
    scenarios: tuple[str, ...]
    text: str


@dataclass(frozen=True)
class Assessment:
    """A deliberate "examined and not hazardous" waiver for one coverage cell.

    Assessments carry no declared id; they are identified by the
    (action, guide_type) pair, which must be unique across the model.
    """

    action: str
    guide_type: GuideType
    rationale: str
    verdict: str = NOT_HAZARDOUS


Element = Union[
    Loss,
    SystemBoundary,
    Hazard,
    Node,
    Edge,
    Uca,
    LossScenario,
    SafetyRequirement,
    Assessment,
]


class Ref(NamedTuple):
    """A (element class, id) pair naming one element of a model."""

    cls: str
    id: str


#: Element classes in canonical declaration order.
ELEMENT_CLASSES: tuple[str, ...] = (
    "loss",
    "boundary",
    "hazard",
    "node",
    "edge",
    "uca",
    "scenario",
    "requirement",
    "assessment",
)

#: Maps an element class to the Model attribute holding its collection.
CLASS_FIELDS: dict[str, str] = {
    "loss": "losses",
    "boundary": "boundaries",
    "hazard": "hazards",
    "node": "nodes",
    "edge": "edges",
    "uca": "ucas",
    "scenario": "scenarios",
    "requirement": "requirements",
    "assessment": "assessments",
}


@dataclass(frozen=True)
class Model:
    """A complete analysis document.

    Collections preserve declaration order; equality is structural and
    ignores ``source_spans``, so two documents differing only in whitespace
    and comments parse to equal models.
    """

    name: str = ""
    losses: tuple[Loss, ...] = ()
    boundaries: tuple[SystemBoundary, ...] = ()
    hazards: tuple[Hazard, ...] = ()
    nodes: tuple[Node, ...] = ()
    edges: tuple[Edge, ...] = ()
    ucas: tuple[Uca, ...] = ()
    scenarios: tuple[LossScenario, ...] = ()
    requirements: tuple[SafetyRequirement, ...] = ()
    assessments: tuple[Assessment, ...] = ()
    source_spans: dict[Ref, Span] = field(
        default_factory=dict, compare=False, repr=False
    )

    def elements_of(self, element_class: str) -> tuple[Element, ...]:
        return getattr(self, CLASS_FIELDS[element_class])


class UnknownReferenceError(ValueError):
    """Raised when an operation is asked about an id that does not resolve."""

    def __init__(self, element_class: str, element_id: str) -> None:
        super().__init__(f"unknown {element_class} '{element_id}'")
        self.element_class = element_class
        self.element_id = element_id


def assessment_key(assessment: Assessment) -> str:
    """Synthetic id for an assessment, unique when the model is valid."""
    return f"{assessment.action}/{assessment.guide_type.value}"


def element_id(element_class: str, element: Element) -> str:
    if element_class == "assessment":
        return assessment_key(element)  # type: ignore[arg-type]
    return element.id  # type: ignore[union-attr]


def class_rank(element_class: str) -> int:
    return ELEMENT_CLASSES.index(element_class)


def lookup(model: Model, element_class: str, element_id_text: str):
    """Return the element with that id in that class, or ``None``.

    Classes are namespaced: looking up a loss id among hazards is a miss,
    never an error.
    """
    if element_class not in CLASS_FIELDS:
        return None
    for element in model.elements_of(element_class):
        if element_id(element_class, element) == element_id_text:
            return element
    return None


def elements_in_boundary(
    model: Model, boundary_id: str
) -> tuple[tuple[Node, ...], tuple[Edge, ...]]:
    """Nodes included in a boundary and the edges whose endpoints both lie
    inside it, each in model declaration order.

    Raises :class:`UnknownReferenceError` if the boundary id does not resolve.
    """
    boundary = lookup(model, "boundary", boundary_id)
    if boundary is None:
        raise UnknownReferenceError("boundary", boundary_id)
    included = set(boundary.includes)
    nodes = tuple(n for n in model.nodes if n.id in included)
    node_ids = {n.id for n in nodes}
    edges = tuple(
        e for e in model.edges if e.source in node_ids and e.target in node_ids
    )
    return nodes, edges
