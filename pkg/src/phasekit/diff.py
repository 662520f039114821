"""Structural comparison of two model versions and downstream impact.

Elements are matched by (class, id); renaming an id therefore shows up as a
removal plus an addition, never as a modification. Reference lists are
compared as sets, so reordering `includes=[a,b]` to `[b,a]` is not a change,
while any field-content change is, including free text: context drift is
treated as analysis-relevant, so there is no cosmetic exemption.

The model name header is outside the element registry and is not diffed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    ELEMENT_CLASSES,
    Element,
    Model,
    Ref,
    class_rank,
    element_id,
)

#: Fields compared per class; set-valued reference fields are marked so they
#: compare order-insensitively.
_FIELDS: dict[str, tuple[tuple[str, bool], ...]] = {
    "loss": (("description", False), ("category", False)),
    "boundary": (("name", False), ("stage", False), ("includes", True)),
    "hazard": (("description", False), ("boundary", False), ("leads_to", True)),
    "node": (
        ("name", False),
        ("kind", False),
        ("process_model", False),
        ("control_algorithm", False),
    ),
    "edge": (("kind", False), ("source", False), ("target", False), ("label", False)),
    "uca": (
        ("source", False),
        ("action", False),
        ("guide_type", False),
        ("category", False),
        ("context", False),
        ("hazards", True),
    ),
    "scenario": (
        ("uca", False),
        ("scenario_class", False),
        ("description", False),
        ("elements", True),
    ),
    "requirement": (("scenarios", True), ("text", False)),
    "assessment": (("verdict", False), ("rationale", False)),
}


@dataclass(frozen=True)
class FieldChange:
    field: str
    old: object
    new: object


@dataclass(frozen=True)
class ModifiedElement:
    ref: Ref
    changes: tuple[FieldChange, ...]


@dataclass(frozen=True)
class ChangeSet:
    added: tuple[Ref, ...]
    removed: tuple[Ref, ...]
    modified: tuple[ModifiedElement, ...]

    def is_empty(self) -> bool:
        return not (self.added or self.removed or self.modified)


@dataclass(frozen=True)
class ImpactEntry:
    """Elements to re-review because one added or modified subject touches
    them."""

    subject: Ref
    ucas: tuple[str, ...]
    scenarios: tuple[str, ...]
    hazards: tuple[str, ...]
    losses: tuple[str, ...]


@dataclass(frozen=True)
class DanglingReport:
    """References in the new model that point at a removed element."""

    removed: Ref
    referenced_by: tuple[Ref, ...]


@dataclass(frozen=True)
class ImpactReport:
    re_review: tuple[ImpactEntry, ...]
    dangling: tuple[DanglingReport, ...]

    def is_empty(self) -> bool:
        return not (self.re_review or self.dangling)


def _ref_sort_key(ref: Ref) -> tuple[int, str]:
    return (class_rank(ref.cls), ref.id)


def element_map(model: Model) -> dict[Ref, Element]:
    """All elements keyed by (class, id), assessments under their synthetic
    cell key."""
    mapping: dict[Ref, Element] = {}
    for cls in ELEMENT_CLASSES:
        for element in model.elements_of(cls):
            mapping[Ref(cls, element_id(cls, element))] = element
    return mapping


def _changed_fields(cls: str, old: Element, new: Element) -> tuple[FieldChange, ...]:
    changes: list[FieldChange] = []
    for field_name, as_set in _FIELDS[cls]:
        old_value = getattr(old, field_name)
        new_value = getattr(new, field_name)
        if as_set:
            if frozenset(old_value) != frozenset(new_value):
                changes.append(FieldChange(field_name, old_value, new_value))
        elif old_value != new_value:
            changes.append(FieldChange(field_name, old_value, new_value))
    return tuple(changes)


def diff(old: Model, new: Model) -> ChangeSet:
    """Added, removed, and field-modified elements between two versions."""
    old_map = element_map(old)
    new_map = element_map(new)
    added = tuple(sorted((r for r in new_map if r not in old_map), key=_ref_sort_key))
    removed = tuple(sorted((r for r in old_map if r not in new_map), key=_ref_sort_key))
    modified: list[ModifiedElement] = []
    for ref in sorted((r for r in old_map.keys() & new_map.keys()), key=_ref_sort_key):
        changes = _changed_fields(ref.cls, old_map[ref], new_map[ref])
        if changes:
            modified.append(ModifiedElement(ref, changes))
    return ChangeSet(added, removed, tuple(modified))


#: (source class, field, target class or "node-or-edge") reference topology,
#: shared by the dangling scan.
_REFERENCE_FIELDS: tuple[tuple[str, str, str], ...] = (
    ("boundary", "includes", "node"),
    ("hazard", "boundary", "boundary"),
    ("hazard", "leads_to", "loss"),
    ("edge", "source", "node"),
    ("edge", "target", "node"),
    ("uca", "source", "node"),
    ("uca", "action", "edge"),
    ("uca", "hazards", "hazard"),
    ("scenario", "uca", "uca"),
    ("scenario", "elements", "node-or-edge"),
    ("requirement", "scenarios", "scenario"),
    ("assessment", "action", "edge"),
)


def _referencers(model: Model, target: Ref) -> tuple[Ref, ...]:
    hits: list[Ref] = []
    for src_cls, field_name, target_cls in _REFERENCE_FIELDS:
        if target_cls != target.cls and not (
            target_cls == "node-or-edge" and target.cls in ("node", "edge")
        ):
            continue
        for element in model.elements_of(src_cls):
            value = getattr(element, field_name)
            values = value if isinstance(value, tuple) else (value,)
            if target.id in values:
                hits.append(Ref(src_cls, element_id(src_cls, element)))
    return tuple(dict.fromkeys(hits))


def impact(changes: ChangeSet, new: Model) -> ImpactReport:
    """What the changes touch downstream, computed against the new version.

    Every added or modified node or edge is flagged for re-review together
    with the ucas, scenarios, hazards, and losses it reaches. Every removed
    element is listed with the references in the new model that now dangle
    (semantic validation reports the same breakage).
    """
    subjects = sorted(
        (
            ref
            for ref in (*changes.added, *(m.ref for m in changes.modified))
            if ref.cls in ("node", "edge")
        ),
        key=_ref_sort_key,
    )

    entries: list[ImpactEntry] = []
    for subject in subjects:
        if subject.cls == "edge":
            ucas = [u for u in new.ucas if u.action == subject.id]
        else:
            ucas = [u for u in new.ucas if u.source == subject.id]
        scenario_ids = tuple(
            s.id for s in new.scenarios if subject.id in s.elements
        )
        hazard_ids = dict.fromkeys(hid for u in ucas for hid in u.hazards)
        loss_ids = dict.fromkeys(
            lid for h in new.hazards if h.id in hazard_ids for lid in h.leads_to
        )
        entries.append(
            ImpactEntry(
                subject=subject,
                ucas=tuple(u.id for u in ucas),
                scenarios=scenario_ids,
                hazards=tuple(hazard_ids),
                losses=tuple(loss_ids),
            )
        )

    dangling = tuple(
        DanglingReport(removed, _referencers(new, removed))
        for removed in changes.removed
    )
    return ImpactReport(tuple(entries), dangling)
