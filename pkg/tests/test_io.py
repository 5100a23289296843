import json

import pytest

from affinekit import io

BUNDLED = {"torus1": "group", "torus2": "group", "z2z2": "group", "torus1_atlas": "atlas",
           "torus2_atlas": "atlas", "leaf_q2": "leaf", "torus7_nerve": "nerve",
           "twisted_circle_nerve": "nerve", "boundary_tetra_nerve": "nerve", "half_cocycle": "cochain"}


@pytest.mark.parametrize("name,schema", sorted(BUNDLED.items()))
def test_bundled_data_validates(name, schema):
    io.load_json(name, schema)


def test_schemas_are_versioned():
    for name in io.SCHEMAS:
        s = io.schema(name)
        assert s["$id"] == f"affinekit/{name}/v1"


def test_validation_error_has_excerpt():
    with pytest.raises(io.InputError) as exc:
        io.validate({"dim": 0, "generators": {}}, "group")
    assert exc.value.excerpt and "generators" in exc.value.excerpt


def test_csv_is_rfc4180():
    text = io.histogram_csv([(0.0, 0.5, 1.25, 0.01)])
    assert text == "bin_lo,bin_hi,mass,stderr\r\n0.0,0.5,1.25,0.01\r\n"


def test_dumps_is_canonical():
    assert io.dumps({"b": 1, "a": [1, 2]}) == io.dumps(json.loads(io.dumps({"a": [1, 2], "b": 1})))
