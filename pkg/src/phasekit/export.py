"""Deterministic renderers: dot diagrams, JSON and markdown reports, CSV.

Every function here is a pure function of its inputs and emits byte-equal
output for equal inputs: no timestamps, no absolute paths, no environment
leakage.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

from .analysis import (
    AnalysisBundle,
    CellState,
    CoverageMatrix,
    scope_ranks,
    trace_loss,
)
from .diagnostics import Diagnostic
from .model import (
    GUIDE_TYPES,
    EdgeKind,
    Model,
    NodeKind,
    elements_in_boundary,
)

_BOX_KINDS = frozenset({NodeKind.HUMAN, NodeKind.TEAM, NodeKind.ORGANIZATION})
_EDGE_STYLES = {
    EdgeKind.CONTROL_ACTION: "solid",
    EdgeKind.FEEDBACK: "dashed",
    EdgeKind.IO_LINK: "dotted",
}


@dataclass(frozen=True)
class RenderOptions:
    boundary: str | None = None
    include_iolinks: bool = True
    rankdir: str = "TB"  # control diagrams read top to bottom


def _dot_quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def to_dot(model: Model, options: RenderOptions | None = None) -> str:
    """Emit the control structure in the dot graph language.

    Humans, teams, and organizations render as boxes, technical artifacts and
    models as ellipses. Control actions are solid, feedback dashed, io-links
    dotted. Nodes are pinned into same-rank rows so the highest control
    authority renders topmost.
    """
    opts = options or RenderOptions()
    if opts.boundary is None:
        nodes, edges = model.nodes, model.edges
    else:
        nodes, edges = elements_in_boundary(model, opts.boundary)
    if not opts.include_iolinks:
        edges = tuple(e for e in edges if e.kind is not EdgeKind.IO_LINK)

    ranks, _ = scope_ranks(model, list(nodes))

    lines = [f"digraph {_dot_quote(model.name or 'model')} {{"]
    lines.append(f"  rankdir={opts.rankdir};")
    for node in nodes:
        shape = "box" if node.kind in _BOX_KINDS else "ellipse"
        attrs = [f"label={_dot_quote(node.name)}", f"shape={shape}"]
        notes = []
        if node.process_model:
            notes.append(f"process model: {node.process_model}")
        if node.control_algorithm:
            notes.append(f"control algorithm: {node.control_algorithm}")
        if notes:
            attrs.append(f"tooltip={_dot_quote('; '.join(notes))}")
        lines.append(f"  {_dot_quote(node.id)} [{', '.join(attrs)}];")
    by_rank: dict[int, list[str]] = {}
    for node in nodes:
        by_rank.setdefault(ranks[node.id], []).append(node.id)
    for rank in sorted(by_rank):
        row = " ".join(f"{_dot_quote(nid)};" for nid in by_rank[rank])
        lines.append(f"  {{ rank=same; {row} }}")
    for edge in edges:
        attrs = [f"label={_dot_quote(edge.label)}", f"style={_EDGE_STYLES[edge.kind]}"]
        lines.append(
            f"  {_dot_quote(edge.source)} -> {_dot_quote(edge.target)} "
            f"[{', '.join(attrs)}];"
        )
    lines.append("}")
    return "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------------------
# JSON report
# ---------------------------------------------------------------------------


def _span_json(diagnostic: Diagnostic) -> dict | None:
    if diagnostic.span is None:
        return None
    return {
        "file": diagnostic.span.file,
        "line": diagnostic.span.line,
        "column": diagnostic.span.column,
    }


def _diagnostic_json(diagnostic: Diagnostic) -> dict:
    return {
        "severity": diagnostic.severity.value,
        "code": diagnostic.code,
        "message": diagnostic.message,
        "span": _span_json(diagnostic),
    }


def _model_json(model: Model) -> dict:
    return {
        "name": model.name,
        "losses": [
            {"id": l.id, "description": l.description, "category": l.category.value}
            for l in model.losses
        ],
        "boundaries": [
            {
                "id": b.id,
                "name": b.name,
                "stage": b.stage.value if b.stage else None,
                "includes": list(b.includes),
            }
            for b in model.boundaries
        ],
        "hazards": [
            {
                "id": h.id,
                "description": h.description,
                "boundary": h.boundary,
                "leads_to": list(h.leads_to),
            }
            for h in model.hazards
        ],
        "nodes": [
            {
                "id": n.id,
                "name": n.name,
                "kind": n.kind.value,
                "process_model": n.process_model,
                "control_algorithm": n.control_algorithm,
            }
            for n in model.nodes
        ],
        "edges": [
            {
                "id": e.id,
                "kind": e.kind.value,
                "source": e.source,
                "target": e.target,
                "label": e.label,
            }
            for e in model.edges
        ],
        "ucas": [
            {
                "id": u.id,
                "source": u.source,
                "action": u.action,
                "guide_type": u.guide_type.value,
                "category": u.category.value,
                "context": u.context,
                "hazards": list(u.hazards),
            }
            for u in model.ucas
        ],
        "scenarios": [
            {
                "id": s.id,
                "uca": s.uca,
                "class": s.scenario_class.value,
                "description": s.description,
                "elements": list(s.elements),
            }
            for s in model.scenarios
        ],
        "requirements": [
            {"id": r.id, "scenarios": list(r.scenarios), "text": r.text}
            for r in model.requirements
        ],
        "assessments": [
            {
                "action": a.action,
                "guide_type": a.guide_type.value,
                "verdict": a.verdict,
                "rationale": a.rationale,
            }
            for a in model.assessments
        ],
    }


def _coverage_json(matrix: CoverageMatrix) -> dict:
    rows = []
    for row in matrix.rows:
        cells = {}
        for guide, cell in zip(GUIDE_TYPES, row.cells):
            entry: dict = {"state": cell.state.value}
            if cell.state is CellState.COVERED:
                entry["ucas"] = list(cell.uca_ids)
            if cell.assessment is not None:
                entry["rationale"] = cell.assessment.rationale
            cells[guide.value] = entry
        rows.append({"controller": row.controller, "action": row.action, "cells": cells})
    covered, waived, gap = matrix.counts()
    return {
        "guide_types": [g.value for g in GUIDE_TYPES],
        "rows": rows,
        "counts": {"covered": covered, "waived": waived, "gap": gap},
        "ratio": matrix.ratio(),
        "warnings": [_diagnostic_json(d) for d in matrix.warnings],
    }


def coverage_json(matrix: CoverageMatrix) -> str:
    """The coverage grid alone, as a JSON document."""
    return json.dumps(_coverage_json(matrix), indent=2, ensure_ascii=False) + "\n"


def report_json(model: Model, analyses: AnalysisBundle) -> str:
    """One structured document with model, diagnostics, coverage, hints and
    metrics sections and a mandatory schema version."""
    metrics = dict(analyses.metrics.counts)
    metrics["coverage_ratio"] = analyses.metrics.coverage_ratio
    metrics["losses_with_hazard_ratio"] = analyses.metrics.losses_with_hazard_ratio
    metrics["hazards_with_uca_ratio"] = analyses.metrics.hazards_with_uca_ratio
    metrics["ucas_with_scenario_ratio"] = analyses.metrics.ucas_with_scenario_ratio
    metrics["scenarios_with_requirement_ratio"] = (
        analyses.metrics.scenarios_with_requirement_ratio
    )
    document = {
        "model": _model_json(model),
        "diagnostics": [_diagnostic_json(d) for d in analyses.diagnostics],
        "coverage": _coverage_json(analyses.coverage),
        "hints": [
            {
                "code": h.code.value,
                "subjects": [{"class": ref.cls, "id": ref.id} for ref in h.subjects],
                "message": h.message,
            }
            for h in analyses.hints
        ],
        "metrics": metrics,
        "schema_version": "1",
    }
    return json.dumps(document, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# Markdown report
# ---------------------------------------------------------------------------


def _md_cell(text: str) -> str:
    return text.replace("|", "\\|")


def _md_table(header: list[str], rows: list[list[str]]) -> list[str]:
    lines = ["| " + " | ".join(header) + " |"]
    lines.append("|" + "|".join(" --- " for _ in header) + "|")
    for row in rows:
        lines.append("| " + " | ".join(_md_cell(cell) for cell in row) + " |")
    return lines


def _coverage_cell_text(cell) -> str:
    if cell.state is CellState.COVERED:
        return "✓ " + ";".join(cell.uca_ids)
    if cell.state is CellState.WAIVED:
        return "waived"
    return "GAP"


def report_markdown(model: Model, analyses: AnalysisBundle) -> str:
    """Human-readable rendering of the same analysis bundle."""
    out: list[str] = [f"# Hazard analysis report: {model.name or '(unnamed model)'}", ""]

    out.append("## Losses")
    out.append("")
    if model.losses:
        out.extend(
            _md_table(
                ["id", "description", "category"],
                [[l.id, l.description, l.category.value] for l in model.losses],
            )
        )
    else:
        out.append("No losses declared.")
    out.append("")

    out.append("## Hazard-to-loss matrix")
    out.append("")
    if model.hazards and model.losses:
        loss_ids = [l.id for l in model.losses]
        rows = []
        for hazard in model.hazards:
            marks = ["x" if lid in hazard.leads_to else "" for lid in loss_ids]
            rows.append([hazard.id, hazard.description, *marks])
        out.extend(_md_table(["hazard", "description", *loss_ids], rows))
    else:
        out.append("No hazards declared.")
    out.append("")

    out.append("## Coverage")
    out.append("")
    if analyses.coverage.rows:
        rows = [
            [row.controller, row.action, *(_coverage_cell_text(c) for c in row.cells)]
            for row in analyses.coverage.rows
        ]
        out.extend(
            _md_table(
                ["controller", "action", *(g.value for g in GUIDE_TYPES)], rows
            )
        )
        covered, waived, gap = analyses.coverage.counts()
        out.append("")
        out.append(
            f"{covered} covered, {waived} waived, {gap} gaps; "
            f"ratio {analyses.coverage.ratio()!r}"
        )
    else:
        out.append("No control actions declared.")
    out.append("")

    out.append("## Diagnostics")
    out.append("")
    if analyses.diagnostics:
        out.extend(f"- {d.format()}" for d in analyses.diagnostics)
    else:
        out.append("No diagnostics.")
    out.append("")

    out.append("## Hints")
    out.append("")
    if analyses.hints:
        out.extend(
            f"- {h.code.value} {','.join(ref.id for ref in h.subjects)}: {h.message}"
            for h in analyses.hints
        )
    else:
        out.append("No hints.")
    out.append("")

    out.append("## Traceability")
    out.append("")
    if model.losses:
        for loss in model.losses:
            tree = trace_loss(model, loss.id)
            hazards = {t.element_id for t in tree.children}
            ucas = {u.element_id for h in tree.children for u in h.children}
            scenarios = {
                s.element_id
                for h in tree.children
                for u in h.children
                for s in u.children
            }
            requirements = {
                r.element_id
                for h in tree.children
                for u in h.children
                for s in u.children
                for r in s.children
            }
            out.append(
                f"- {loss.id}: {len(hazards)} hazards, {len(ucas)} ucas, "
                f"{len(scenarios)} scenarios, {len(requirements)} requirements"
            )
    else:
        out.append("No losses declared.")
    out.append("")

    return "\n".join(out)


# ---------------------------------------------------------------------------
# CSV coverage table
# ---------------------------------------------------------------------------


def coverage_csv(matrix: CoverageMatrix) -> str:
    """RFC 4180 rendering of the coverage grid, one row per control action,
    rows presorted by (controller, action)."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["controller", "action", *(g.value for g in GUIDE_TYPES)])
    for row in matrix.rows:
        cells = []
        for cell in row.cells:
            if cell.state is CellState.COVERED:
                cells.append("covered:" + ";".join(cell.uca_ids))
            elif cell.state is CellState.WAIVED:
                cells.append("waived")
            else:
                cells.append("gap")
        writer.writerow([row.controller, row.action, *cells])
    return buffer.getvalue()
