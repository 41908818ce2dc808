import json

import numpy as np
import pytest

from fairrank.errors import SchemaError
from fairrank.tabular_data import Encoding, TabularSchema, load_csv

SCHEMA = {
    "label_column": "outcome",
    "positive_labels": ["yes"],
    "negative_labels": ["no"],
    "sensitive_column": "sex",
    "group1_values": ["M"],
    "group0_values": ["F"],
    "numeric": ["age"],
    "categorical": ["color"],
    "drop": ["id"],
}


def _write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestSchema:
    def test_feature_cannot_be_label(self):
        with pytest.raises(SchemaError):
            TabularSchema.from_dict({**SCHEMA, "numeric": ["age", "outcome"]})

    def test_column_classified_twice(self):
        with pytest.raises(SchemaError):
            TabularSchema.from_dict({**SCHEMA, "drop": ["age"]})

    def test_unknown_key(self):
        with pytest.raises(SchemaError):
            TabularSchema.from_dict({**SCHEMA, "colour": []})

    def test_shipped_schemas_parse(self):
        import pathlib
        root = pathlib.Path(__file__).resolve().parents[1] / "schemas"
        names = sorted(TabularSchema.from_json(p).name for p in root.glob("*.json"))
        assert names == ["adult", "bank", "compas", "german"]


class TestLoad:
    def test_small_file(self, tmp_path):
        p = _write(tmp_path, "id,age,color,sex,outcome\n1,30,red,M,yes\n2,40,blue,F,no\n"
                             "3,50,red,F,yes\n")
        ds, rep = load_csv(p, TabularSchema.from_dict(SCHEMA))
        assert ds.d == 3 and rep["d"] == 3
        np.testing.assert_array_equal(ds.y, [1, -1, 1])
        np.testing.assert_array_equal(ds.z, [1, 0, 0])
        assert rep["encoding"]["levels"]["color"] == ["red", "blue"]
        np.testing.assert_allclose(ds.X[:, 0].mean(), 0.0, atol=1e-12)
        np.testing.assert_allclose(ds.X[:, 0].var(), 1.0, atol=1e-9)
        np.testing.assert_array_equal(ds.X[:, 1:].sum(axis=1), 1.0)

    def test_rejections_are_counted(self, tmp_path):
        p = _write(tmp_path, "id,age,color,sex,outcome\n1,30,red,M,yes\n2,abc,red,F,no\n"
                             "3,50,red,X,yes\n4,20,red,F,maybe\n5,25,blue,F,no\n")
        ds, rep = load_csv(p, TabularSchema.from_dict(SCHEMA))
        assert ds.n == 2
        assert rep["rejected"] == {"numeric_parse": 1, "unmapped_group": 1, "unmapped_label": 1}

    def test_missing_and_unlisted_columns(self, tmp_path):
        p = _write(tmp_path, "id,age,sex,outcome\n1,30,M,yes\n")
        with pytest.raises(SchemaError):
            load_csv(p, TabularSchema.from_dict(SCHEMA))
        p = _write(tmp_path, "id,age,color,sex,outcome,extra\n1,30,red,M,yes,0\n")
        with pytest.raises(SchemaError):
            load_csv(p, TabularSchema.from_dict(SCHEMA))
        ds, _ = load_csv(p, TabularSchema.from_dict({**SCHEMA, "drop_unlisted": True}))
        assert ds.n == 1

    def test_reusing_encoding(self, tmp_path):
        train = _write(tmp_path, "id,age,color,sex,outcome\n1,30,red,M,yes\n2,50,blue,F,no\n")
        test = _write(tmp_path, "id,age,color,sex,outcome\n3,40,blue,M,no\n4,40,green,F,no\n",
                      "t.csv")
        schema = TabularSchema.from_dict(SCHEMA)
        _, rep = load_csv(train, schema)
        enc = Encoding.from_dict(json.loads(json.dumps(rep["encoding"])))
        ds, rep2 = load_csv(test, schema, enc)
        assert ds.n == 1 and rep2["rejected"] == {"unseen_level": 1}
        np.testing.assert_allclose(ds.X[0], [0.0, 0.0, 1.0])

    def test_deterministic_and_group_range(self, tmp_path):
        p = _write(tmp_path, "age;job;y\n24;a;yes\n25;b;no\n60;a;no\n61;b;yes\n")
        schema = TabularSchema.from_dict({
            "label_column": "y", "positive_labels": ["yes"], "sensitive_column": "age",
            "group1_range": [25, 60], "categorical": ["job"], "delimiter": ";"})
        a, _ = load_csv(p, schema)
        b, _ = load_csv(p, schema)
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.z, [0, 1, 1, 0])
