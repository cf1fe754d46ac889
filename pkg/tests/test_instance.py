import json

import numpy as np
import pytest

from peakbench.errors import SchemaError
from peakbench.generator import generate
from peakbench.instance import deserialize, from_document, load, save, serialize, to_document


@pytest.mark.parametrize("cid", [f"BONO{i}" for i in range(1, 21)])
def test_round_trip_is_bit_exact(cid, rng):
    inst = generate(cid, 3, 2)
    back = deserialize(serialize(inst))
    assert serialize(back) == serialize(inst)
    X = rng.uniform(-5, 5, (100, 3))
    a, b = inst.problem.evaluate_many(X), back.problem.evaluate_many(X)
    assert a.tobytes() == b.tobytes()
    assert back.params == inst.params


def test_save_and_load(tmp_path):
    inst = generate("BONO4", 2, 1)
    save(inst, tmp_path / "i.json")
    assert serialize(load(tmp_path / "i.json")) == serialize(inst)


def _doc():
    return json.loads(serialize(generate("BONO3", 2, 0)))


def test_asymmetric_hessian_is_rejected():
    doc = _doc()
    doc["objectives"][0]["components"][0]["hessian"][0][1] += 0.5
    with pytest.raises(SchemaError, match="hessian.*symmetric"):
        from_document(doc)


def test_schema_version_is_checked():
    doc = _doc()
    doc["schema_version"] = 0
    with pytest.raises(SchemaError, match="schema_version"):
        from_document(doc)


def test_non_finite_values_are_rejected():
    text = serialize(generate("BONO1", 2, 0)).replace('"offset": ', '"offset": NaN, "x": ', 1)
    with pytest.raises(SchemaError):
        deserialize(text)


def test_missing_field_is_named():
    doc = _doc()
    del doc["nadir"]
    with pytest.raises(SchemaError, match="nadir"):
        from_document(doc)


def test_malformed_json():
    with pytest.raises(SchemaError):
        deserialize("{not json")


def test_document_fields():
    doc = to_document(generate("BONO15", 2, 0))
    for key in ("schema_version", "config", "dimension", "seed", "objectives", "bounds",
                "global_optima", "ideal", "nadir", "params", "rng"):
        assert key in doc
    assert np.array(doc["bounds"]["lower"]).tolist() == [-5.0, -5.0]
