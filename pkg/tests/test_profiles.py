import warnings
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from peakbench.errors import SchemaError
from peakbench.harness import N_TARGETS, RunRecord, target_grid
from peakbench.profiles import (
    DEFAULT_STYLE,
    PROFILE_SCHEMA,
    ProfileCurve,
    aggregate,
    ecdf,
    emit_csv,
    emit_svg,
    group_key,
    load_style,
    read_csv,
    virtual_best,
)

TARGETS = target_grid(1e-4, 1.0)
SVG = "{http://www.w3.org/2000/svg}"


def rec(alg, hits, *, cls="BONO1", dim=2, seed=0, ind="HYPERVOLUME", budget=10_000):
    hits = list(hits) + [None] * (N_TARGETS - len(hits))
    return RunRecord(alg, cls, dim, seed, ind, TARGETS.copy(), hits, budget, budget_used=budget)


def easiest(n, t=100):
    """Hits where only the ``n`` easiest targets are solved, all at time ``t``."""
    return [None] * (N_TARGETS - n) + [t] * n


def test_half_solved_plateau():
    r = rec("a", easiest(50, t=40), dim=4)
    [curve] = aggregate([r])
    assert curve.support.tolist() == [10.0]
    assert curve.fraction_solved.tolist() == [50 / 101]
    assert curve.at(9.99) == 0.0 and curve.at(1e9) == pytest.approx(50 / 101)
    raw, frac = ecdf([r], per_dim=False)
    assert raw.tolist() == [40.0] and frac.tolist() == [50 / 101]


def test_duplicated_runs_give_identical_curve():
    a = rec("a", [None] * 60 + list(range(41, 0, -1)), seed=0)
    b = rec("a", [None] * 30 + [500] * 71, seed=1)
    [once] = aggregate([a, b])
    [twice] = aggregate([a, b, a, b])
    assert once.same_as(twice)


def test_vbs_takes_minimum_per_target():
    a = rec("A", [10, None])
    b = rec("B", [None, 20])
    [vbs] = virtual_best([a, b])
    assert vbs.hits[:2] == [10, 20] and vbs.algorithm == "VBS"
    a2 = rec("A", [5, 50])
    b2 = rec("B", [7, 3])
    assert virtual_best([a2, b2])[0].hits[:2] == [5, 3]


def test_vbs_of_single_algorithm_equals_it():
    records = [rec("A", easiest(k, t=10 * k + 1), seed=k) for k in range(5)]
    vbs = virtual_best(records)
    assert [v.hits for v in vbs] == [r.hits for r in records]
    a = aggregate(records)[0]
    v = aggregate(vbs)[0]
    assert np.array_equal(a.support, v.support) and np.array_equal(a.fraction_solved, v.fraction_solved)


def test_vbs_rejects_mismatched_coverage_and_duplicates():
    with pytest.raises(ValueError, match=r"B@BONO1/d2/s1/HYPERVOLUME"):
        virtual_best([rec("A", [], seed=0), rec("A", [], seed=1), rec("B", [], seed=0)])
    with pytest.raises(ValueError, match="duplicate"):
        virtual_best([rec("A", []), rec("A", [])])
    other = rec("B", [])
    other.targets = target_grid(1e-5, 1.0)
    with pytest.raises(ValueError, match="target grids"):
        virtual_best([rec("A", []), other])


def _monotone_hits():
    # the k easiest targets solved, hitting times non-increasing towards easier targets
    return st.integers(0, N_TARGETS).flatmap(
        lambda k: st.lists(st.integers(1, 10_000), min_size=k, max_size=k).map(
            lambda ts: [None] * (N_TARGETS - k) + sorted(ts, reverse=True)))


@st.composite
def run_sets(draw):
    n_alg = draw(st.integers(1, 4))
    n_inst = draw(st.integers(1, 4))
    out = []
    for a in range(n_alg):
        for s in range(n_inst):
            for ind in ("HYPERVOLUME", "EXACT_R2"):
                out.append(rec(f"alg{a}", draw(_monotone_hits()), seed=s, ind=ind))
    return out


@settings(max_examples=200, deadline=None)
@given(run_sets())
def test_vbs_dominates_every_algorithm(records):
    curves = aggregate(records)
    vbs = {c.group: c for c in aggregate(virtual_best(records))}
    for c in curves:
        xs = np.concatenate([c.support, vbs[c.group].support])
        for x in xs:
            assert vbs[c.group].at(x) >= c.at(x)


@settings(max_examples=200, deadline=None)
@given(run_sets(), st.randoms(use_true_random=False))
def test_aggregation_is_permutation_invariant(records, random):
    shuffled = list(records)
    random.shuffle(shuffled)
    a, b = aggregate(records), aggregate(shuffled)
    assert len(a) == len(b) and all(x.same_as(y) for x, y in zip(a, b))
    for c in a:
        assert np.all(np.diff(c.fraction_solved) >= 0) and np.all(c.fraction_solved <= 1)


def test_grouping_keys():
    r = rec("a", [], cls="BONO7", dim=5, ind="EXACT_R2")
    assert group_key(r, ("indicator", "dim")) == "indicator=EXACT_R2|dim=5"
    assert group_key(r, ("class",)) == "class=BONO7"
    with pytest.raises(ValueError):
        group_key(r, ("budget",))
    curves = aggregate([r, rec("a", [], dim=3)], group_by=("dim",))
    # indicator is always part of the group
    assert {c.group for c in curves} == {"indicator=EXACT_R2|dim=5", "indicator=HYPERVOLUME|dim=3"}


def test_empty_input_warns():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        assert aggregate([]) == []
    assert caught


def test_curve_validation():
    with pytest.raises(ValueError):
        ProfileCurve("a", "g", [1.0, 1.0], [0.1, 0.2])
    with pytest.raises(ValueError):
        ProfileCurve("a", "g", [1.0, 2.0], [0.3, 0.2])
    with pytest.raises(ValueError):
        ProfileCurve("a", "g", [1.0], [1.5])


def _curves():
    records = [rec("A", easiest(30 + 10 * s, t=10 ** (s + 1)), seed=s) for s in range(3)]
    records += [rec("B", easiest(70, t=7), seed=s) for s in range(3)]
    return aggregate(records + virtual_best(records))


def test_csv_round_trip(tmp_path):
    curves = _curves()
    emit_csv(curves, tmp_path / "p.csv")
    text = (tmp_path / "p.csv").read_text()
    assert text.splitlines()[0] == PROFILE_SCHEMA
    back = read_csv(tmp_path / "p.csv")
    assert len(back) == len(curves) and all(a.same_as(b) for a, b in zip(curves, back))


def test_csv_schema_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("group,algorithm,evals_per_d,fraction_solved\n")
    with pytest.raises(SchemaError):
        read_csv(p)
    p.write_text(PROFILE_SCHEMA + "\ngroup,alg,x,y\n")
    with pytest.raises(SchemaError):
        read_csv(p)


def test_svg_structure(tmp_path):
    curves = _curves()
    emit_svg(curves, tmp_path / "p.svg")
    root = ET.parse(tmp_path / "p.svg").getroot()
    assert root.tag == SVG + "svg"
    lines = root.findall(f".//{SVG}polyline[@class='curve']")
    assert len(lines) == len(curves)
    assert {l.get("data-algorithm") for l in lines} == {"A", "B", "VBS"}
    vbs = [l for l in lines if l.get("data-algorithm") == "VBS"][0]
    assert vbs.get("stroke-dasharray")
    ticks = [float(g.get("data-value")) for g in root.iter(SVG + "g") if g.get("class") == "xtick"]
    assert ticks and all(np.log10(t) == round(np.log10(t)) for t in ticks)
    assert root.find(f".//{SVG}g[@class='legend']") is not None
    with pytest.raises(ValueError):
        emit_svg([], tmp_path / "empty.svg")


def test_style_file(tmp_path):
    p = tmp_path / "style.txt"
    p.write_text("# comment\nwidth = 1000\nvbs_color = #ff0000\n\n")
    style = load_style(p)
    assert style["width"] == "1000" and style["vbs_color"] == "#ff0000"
    assert style["height"] == DEFAULT_STYLE["height"]
    emit_svg(_curves(), tmp_path / "p.svg", style)
    root = ET.parse(tmp_path / "p.svg").getroot()
    assert root.get("width") == "1000"
    p.write_text("colour = red\n")
    with pytest.raises(ValueError, match="unknown style key"):
        load_style(p)
