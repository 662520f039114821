from __future__ import annotations

import dataclasses

import pytest

from phasekit import (
    CellState,
    GuideType,
    HintCode,
    Model,
    Severity,
    UnknownReferenceError,
    coverage,
    hierarchy_ranks,
    hints,
    metrics,
    parse,
    trace_loss,
    trace_node,
    validate,
)

FIVE_ACTIONS = (
    'node A "a" kind=human\nnode B "b" kind=human\n'
    + "".join(f'action CA{i} from=A to=B "act {i}"\n' for i in range(1, 6))
)


def model_of(text: str) -> Model:
    result = parse(text)
    assert result.model is not None, [d.format() for d in result.diagnostics]
    return result.model


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def test_fixtures_are_semantically_valid(c1, c2, c3):
    assert validate(c1) == []
    assert validate(c2) == []
    assert validate(c3) == []


def test_dangling_uca_action_is_one_error():
    model = model_of(
        'boundary SB "s"\nloss L1 "l" category=sociotechnical\n'
        'hazard H1 "h" boundary=SB leads_to=[L1]\n'
        'uca UCA1 action=CA9 type=provided category=functional context="c" hazards=[H1]\n'
    )
    (diag,) = validate(model)
    assert diag.code == "V001"
    assert "UCA1" in diag.message and "CA9" in diag.message
    assert diag.span.line == 4


def test_uca_source_mismatch():
    base = model_of(
        'node A "a" kind=human\nnode B "b" kind=human\nnode C "c" kind=human\n'
        'boundary SB "s"\nloss L1 "l" category=sociotechnical\n'
        'hazard H1 "h" boundary=SB leads_to=[L1]\n'
        'action CA1 from=B to=C "act"\n'
        'uca UCA1 action=CA1 type=provided category=functional context="x" hazards=[H1]\n'
    )
    ucas = (dataclasses.replace(base.ucas[0], source="A"),)
    model = dataclasses.replace(base, ucas=ucas)
    (diag,) = validate(model)
    assert diag.code == "V002"
    assert "'A'" in diag.message and "'B'" in diag.message


def test_uca_on_non_control_edge():
    model = model_of(
        'node A "a" kind=human\nnode B "b" kind=human\n'
        'boundary SB "s"\nloss L1 "l" category=sociotechnical\n'
        'hazard H1 "h" boundary=SB leads_to=[L1]\n'
        'feedback FB1 from=A to=B "fb"\n'
        'uca UCA1 action=FB1 type=provided category=functional context="x" hazards=[H1]\n'
    )
    assert [d.code for d in validate(model)] == ["V003"]


def test_empty_reference_lists_are_errors():
    model = Model(
        hazards=(
            dataclasses.replace(
                model_of(
                    'boundary SB "s"\nloss L1 "l" category=sociotechnical\n'
                    'hazard H1 "h" boundary=SB leads_to=[L1]'
                ).hazards[0],
                leads_to=(),
            ),
        ),
        boundaries=model_of('boundary SB "s"').boundaries,
    )
    assert [d.code for d in validate(model)] == ["V004"]


def test_duplicate_assessment_cell():
    model = model_of(
        'node A "a" kind=human\nnode B "b" kind=human\n'
        'action CA1 from=A to=B "act"\n'
        'assess action=CA1 type=provided verdict=not-hazardous rationale="one"\n'
        'assess action=CA1 type=provided verdict=not-hazardous rationale="two"\n'
    )
    diags = validate(model)
    assert [d.code for d in diags] == ["V005"]
    assert diags[0].related_span is not None


def test_self_loop_is_a_warning():
    model = model_of('node A "a" kind=human\naction CA1 from=A to=A "self"')
    (diag,) = validate(model)
    assert diag.code == "V100"
    assert diag.severity is Severity.WARNING


def test_dangling_references_all_fields():
    model = model_of(
        'node A "a" kind=human\n'
        'boundary SB "s" includes=[A,GHOST]\n'
        'loss L1 "l" category=sociotechnical\n'
        'hazard H1 "h" boundary=NOPE leads_to=[L1,L9]\n'
        'action CA1 from=A to=GHOST2 "act"\n'
        'uca U1 action=CA1 type=provided category=functional context="c" hazards=[H1,H9]\n'
        'scenario S1 uca=U9 class=technical "d" elements=[A,CA1,GHOST3]\n'
        'requirement R1 scenarios=[S1,S9] "t"\n'
        'assess action=CA9 type=provided verdict=not-hazardous rationale="r"\n'
    )
    codes = [d.code for d in validate(model)]
    assert codes.count("V001") == 9
    assert set(codes) == {"V001"}


# ---------------------------------------------------------------------------
# hierarchy_ranks
# ---------------------------------------------------------------------------


def test_hierarchy_chain():
    model = model_of(
        'node Manager "m" kind=human\nnode Dev "d" kind=human\nnode Dataset "ds" kind=technical-artifact\n'
        'boundary B "all" includes=[Manager,Dev,Dataset]\n'
        'action E1 from=Manager to=Dev "directs"\n'
        'action E2 from=Dev to=Dataset "edits"\n'
    )
    ranks, cycle_hints = hierarchy_ranks(model, "B")
    assert ranks == {"Manager": 0, "Dev": 1, "Dataset": 2}
    assert cycle_hints == []


def test_hierarchy_no_control_edges():
    model = model_of(
        'node A "a" kind=human\nnode B "b" kind=human\nnode C "c" kind=human\n'
        'boundary X "all" includes=[A,B,C]\n'
        'feedback F1 from=A to=B "fb"\n'
    )
    ranks, _ = hierarchy_ranks(model, "X")
    assert ranks == {"A": 0, "B": 0, "C": 0}


def test_hierarchy_c2_operation_boundary(c2):
    ranks, cycle_hints = hierarchy_ranks(c2, "SB2")
    assert ranks == {"RLAgent": 0, "InsulinPump": 1, "Patient": 2}
    assert cycle_hints == []


def test_hierarchy_cycle_hint_per_component():
    model = model_of(
        'node A "a" kind=human\nnode B "b" kind=human\nnode C "c" kind=human\n'
        'node D "d" kind=human\n'
        'boundary X "all" includes=[A,B,C,D]\n'
        'action E1 from=A to=B "x"\naction E2 from=B to=A "y"\n'
        'action E3 from=B to=C "z"\naction E4 from=C to=D "w"\n'
    )
    ranks, cycle_hints = hierarchy_ranks(model, "X")
    assert len(cycle_hints) == 1
    assert cycle_hints[0].code is HintCode.HIERARCHY_CYCLE
    assert tuple(ref.id for ref in cycle_hints[0].subjects) == ("A", "B")
    # Ranks stay defined on the cycle: back edge B->A ignored.
    assert ranks == {"A": 0, "B": 1, "C": 2, "D": 3}


def test_hierarchy_self_loop_is_not_a_cycle_component():
    model = model_of(
        'node A "a" kind=human\nboundary X "all" includes=[A]\n'
        'action E1 from=A to=A "self"\n'
    )
    ranks, cycle_hints = hierarchy_ranks(model, "X")
    assert ranks == {"A": 0}
    assert cycle_hints == []


def test_hierarchy_unknown_boundary(c1):
    with pytest.raises(UnknownReferenceError):
        hierarchy_ranks(c1, "ZZ")


def test_hierarchy_iolinks_do_not_rank():
    model = model_of(
        'node A "a" kind=human\nnode B "b" kind=human\n'
        'boundary X "all" includes=[A,B]\n'
        'iolink I1 from=A to=B "chat"\n'
    )
    ranks, _ = hierarchy_ranks(model, "X")
    assert ranks == {"A": 0, "B": 0}


# ---------------------------------------------------------------------------
# coverage
# ---------------------------------------------------------------------------


def test_coverage_all_gaps():
    matrix = coverage(model_of(FIVE_ACTIONS))
    assert len(matrix.rows) == 5
    assert matrix.counts() == (0, 0, 20)
    assert matrix.ratio() == 0.0


def test_coverage_cell_accounting():
    text = FIVE_ACTIONS + (
        'boundary SB "s"\nloss L1 "l" category=sociotechnical\n'
        'hazard H1 "h" boundary=SB leads_to=[L1]\n'
        'uca U1 action=CA1 type=not-provided category=functional context="c" hazards=[H1]\n'
        'assess action=CA1 type=provided verdict=not-hazardous rationale="r"\n'
    )
    matrix = coverage(model_of(text))
    assert matrix.counts() == (1, 1, 18)
    assert matrix.warnings == ()


def test_coverage_conflicting_waiver_warning():
    text = FIVE_ACTIONS + (
        'boundary SB "s"\nloss L1 "l" category=sociotechnical\n'
        'hazard H1 "h" boundary=SB leads_to=[L1]\n'
        'uca U1 action=CA1 type=provided category=functional context="c" hazards=[H1]\n'
        'assess action=CA1 type=provided verdict=not-hazardous rationale="r"\n'
    )
    matrix = coverage(model_of(text))
    # The conflicted cell counts once, as covered.
    assert matrix.counts() == (1, 0, 19)
    (warning,) = matrix.warnings
    assert warning.code == "C001"
    assert warning.severity is Severity.WARNING


def test_coverage_c2_pump_not_provided_cell(c2):
    matrix = coverage(c2, "SB2")
    row = next(r for r in matrix.rows if r.action == "CA4")
    assert row.controller == "InsulinPump"
    cell = row.cells[list(GuideType).index(GuideType.NOT_PROVIDED)]
    assert cell.state is CellState.COVERED
    assert cell.uca_ids == ("UCA1",)


def test_coverage_rows_sorted_by_controller_then_action():
    matrix = coverage(model_of(
        'node Z "z" kind=human\nnode A "a" kind=human\n'
        'action C2 from=Z to=A "x"\naction C1 from=A to=Z "y"\naction C0 from=Z to=A "w"\n'
    ))
    assert [(r.controller, r.action) for r in matrix.rows] == [
        ("A", "C1"), ("Z", "C0"), ("Z", "C2"),
    ]


def test_coverage_unknown_boundary(c1):
    with pytest.raises(UnknownReferenceError):
        coverage(c1, "ZZ")


def test_coverage_boundary_scope(c2):
    # SB1 holds CA1 (researchers) and CA2 (agent on the simulator).
    matrix = coverage(c2, "SB1")
    assert [r.action for r in matrix.rows] == ["CA2", "CA1"]


# ---------------------------------------------------------------------------
# hints
# ---------------------------------------------------------------------------


def test_hints_missing_feedback_for_dataset_supply_edge(c3):
    found = [
        h for h in hints(c3)
        if h.code is HintCode.MISSING_FEEDBACK and h.subjects[0].id == "CA4"
    ]
    assert len(found) == 1
    assert "DatasetCreators" in found[0].message


def test_hints_empty_on_fully_linked_loop():
    text = (
        'loss L1 "l" category=sociotechnical\n'
        'boundary SB "s" includes=[A,B]\n'
        'hazard H1 "h" boundary=SB leads_to=[L1]\n'
        'node A "a" kind=human process_model="knows the loop"\n'
        'node B "b" kind=human\n'
        'action CA1 from=A to=B "act"\n'
        'feedback FB1 from=B to=A "fb"\n'
        'uca U1 action=CA1 type=provided category=functional context="c" hazards=[H1]\n'
        'scenario S1 uca=U1 class=technical "d"\n'
        'requirement R1 scenarios=[S1] "t"\n'
    )
    assert hints(model_of(text)) == []


def test_hints_loss_without_hazard():
    model = model_of('loss L9 "unused" category=sociotechnical')
    (hint,) = hints(model)
    assert hint.code is HintCode.LOSS_WITHOUT_HAZARD
    assert hint.subjects == ((("loss", "L9")),)


def test_hints_orphan_node():
    model = model_of('node X "x" kind=team')
    (hint,) = hints(model)
    assert hint.code is HintCode.ORPHAN_NODE


def test_hints_no_process_model_only_for_uca_bearing_sources():
    text = (
        'loss L1 "l" category=sociotechnical\n'
        'boundary SB "s"\n'
        'hazard H1 "h" boundary=SB leads_to=[L1]\n'
        'node A "a" kind=human\n'
        'node B "b" kind=human\n'
        'node C "c" kind=human\n'
        'action CA1 from=A to=B "with uca"\n'
        'action CA2 from=C to=B "without uca"\n'
        'feedback FB1 from=B to=A "fb"\nfeedback FB2 from=B to=C "fb2"\n'
        'uca U1 action=CA1 type=provided category=functional context="c" hazards=[H1]\n'
        'scenario S1 uca=U1 class=technical "d"\n'
        'requirement R1 scenarios=[S1] "t"\n'
    )
    found = hints(model_of(text))
    assert [h.code for h in found] == [HintCode.NO_PROCESS_MODEL]
    assert found[0].subjects[0].id == "A"


def test_hints_self_loop():
    model = model_of('node A "a" kind=human\niolink IO1 from=A to=A "self"')
    assert [h.code for h in hints(model)] == [HintCode.SELF_LOOP]


def test_hints_deterministic_order(c3):
    first = hints(c3)
    second = hints(c3)
    assert first == second
    keys = [(h.code.value, tuple(r.id for r in h.subjects)) for h in first]
    assert keys == sorted(keys)


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------


def test_trace_loss_reaches_paper_anchored_elements(c1):
    tree = trace_loss(c1, "L1")
    hazard_ids = {child.element_id for child in tree.children}
    assert "H1" in hazard_ids  # performance-requirements hazard
    scenario_ids = {
        s.element_id
        for h in tree.children
        for u in h.children
        for s in u.children
    }
    assert "S1" in scenario_ids  # alarm-misunderstanding scenario


def test_trace_loss_depth_zero():
    model = model_of('loss L1 "l" category=sociotechnical')
    tree = trace_loss(model, "L1")
    assert tree.element_class == "loss"
    assert tree.children == ()


def test_trace_loss_two_hazards_one_uca_each():
    text = (
        'loss L1 "l" category=sociotechnical\n'
        'boundary SB "s"\n'
        'hazard H1 "h1" boundary=SB leads_to=[L1]\n'
        'hazard H2 "h2" boundary=SB leads_to=[L1]\n'
        'node A "a" kind=human\nnode B "b" kind=human\n'
        'action CA1 from=A to=B "x"\naction CA2 from=A to=B "y"\n'
        'uca U1 action=CA1 type=provided category=functional context="c1" hazards=[H1]\n'
        'uca U2 action=CA2 type=provided category=functional context="c2" hazards=[H2]\n'
    )
    tree = trace_loss(model_of(text), "L1")
    assert len(tree.children) == 2
    leaves = [u.element_id for h in tree.children for u in h.children]
    assert leaves == ["U1", "U2"]


def test_trace_loss_unknown_id(c1):
    with pytest.raises(UnknownReferenceError):
        trace_loss(c1, "L99")


def test_trace_node_physician_includes_alert_use_uca(c1):
    report = trace_node(c1, "Physician")
    assert "CA5" in report.actions
    assert "UCA3" in report.ucas
    assert "H3" in report.hazards
    assert "L1" in report.losses
    assert "S1" in report.scenarios


def test_trace_node_empty_report():
    model = model_of('node X "x" kind=human')
    report = trace_node(model, "X")
    assert report.actions == ()
    assert report.ucas == ()
    assert report.hazards == ()
    assert report.losses == ()
    assert report.scenarios == ()


def test_trace_node_scenario_citation_only():
    text = (
        'loss L1 "l" category=sociotechnical\n'
        'boundary SB "s"\n'
        'hazard H1 "h" boundary=SB leads_to=[L1]\n'
        'node A "a" kind=human\nnode B "b" kind=human\nnode W "w" kind=human\n'
        'action CA1 from=A to=B "x"\n'
        'uca U1 action=CA1 type=provided category=functional context="c" hazards=[H1]\n'
        'scenario S1 uca=U1 class=interaction "d" elements=[W]\n'
    )
    report = trace_node(model_of(text), "W")
    assert report.actions == () and report.ucas == ()
    assert report.hazards == () and report.losses == ()
    assert report.scenarios == ("S1",)


def test_trace_node_unknown_id(c1):
    with pytest.raises(UnknownReferenceError):
        trace_node(c1, "Nobody")


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


def test_metrics_c1_counts(c1):
    m = metrics(c1)
    assert m.counts["losses"] == 4
    assert m.counts["boundaries"] == 3
    assert m.counts["ucas"] == 5


def test_metrics_empty_model_is_vacuously_complete():
    m = metrics(Model())
    assert all(count == 0 for count in m.counts.values())
    assert m.coverage_ratio == 1.0
    assert m.losses_with_hazard_ratio == 1.0
    assert m.hazards_with_uca_ratio == 1.0
    assert m.ucas_with_scenario_ratio == 1.0
    assert m.scenarios_with_requirement_ratio == 1.0


def test_metrics_all_gaps_ratio_zero():
    assert metrics(model_of(FIVE_ACTIONS)).coverage_ratio == 0.0
