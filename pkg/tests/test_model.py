import json

import pytest
from hypothesis import given, settings

from conftest import polys
from craut.core import VarTable, parse_poly
from craut.model import (
    CRModel,
    ModelError,
    StratificationError,
    builtin_model,
    builtin_model_names,
    load_model,
    model_from_dict,
    model_to_dict,
    restrict_to_M,
    validate_model,
)

CORPUS = builtin_model_names()
BG_WARNED = {f"m{k:02d}" for k in range(7, 18)}


def test_corpus_has_all_models():
    assert len(CORPUS) == 20
    assert {f"m{k:02d}" for k in range(1, 18)} <= set(CORPUS)


@pytest.mark.parametrize("name", CORPUS)
def test_corpus_models_validate(name):
    issues = validate_model(builtin_model(name))
    assert not [v for v in issues if v.fatal]
    assert bool(issues) == (name in BG_WARNED)


@pytest.mark.parametrize("name", CORPUS)
def test_restriction_kills_defining_relations(name):
    m = builtin_model(name)
    for j in range(m.k):
        assert not restrict_to_M(m, m.defining_relation(j))


@pytest.mark.parametrize("name", CORPUS)
def test_restriction_has_no_barred_w(name):
    m = builtin_model(name)
    t = m.table
    for l in range(m.k):
        r = restrict_to_M(m, t.gen(t.bw(l)) * t.gen(t.bz(0)))
        assert not any(r.degree_in(t.bw(i)) for i in range(m.k))
        assert r.wdeg_set() == {m.weights_w[l] + 1}


M7 = builtin_model("m07")


@settings(max_examples=150, deadline=None)
@given(polys(M7.table, max_terms=3, max_exp=1), polys(M7.table, max_terms=3, max_exp=1))
def test_restriction_is_a_ring_homomorphism(p, q):
    r = lambda x: restrict_to_M(M7, x)
    assert r(p * q) == r(p) * r(q)
    assert r(p + q) == r(p) + r(q)


def test_restriction_examples():
    m = builtin_model("cubic_1_3")
    t = m.table
    assert restrict_to_M(m, t.gen("bw1")) == parse_poly(t, "w1 - 2*I*z1*bz1")
    p = parse_poly(t, "z1^2*bz1")
    assert restrict_to_M(m, p) == p
    t7 = M7.table
    expected = parse_poly(t7, "w7 - 2*I*(z1^4*bz1+z1*bz1^4) - c*I*(2*w1 - 2*I*z1*bz1)*(z1^2*bz1+z1*bz1^2)")
    assert restrict_to_M(M7, t7.gen("bw7")) == expected


def _model(rhs, weights=(2,), params=()):
    t = VarTable(1, weights, params)
    return CRModel(t, tuple(parse_poly(t, r) for r in rhs))


def test_validation_catches_each_defect():
    kinds = lambda m: {v.kind for v in validate_model(m)}
    assert "not anti-real" in kinds(_model(["z1*bz1"]))
    assert "inhomogeneous weight" in kinds(_model(["I*z1*bz1 + I*z1^2*bz1 + I*z1*bz1^2"]))
    assert "pluriharmonic term" in kinds(_model(["I*z1^2 - I*bz1^2 + 2*I*z1*bz1"]))
    assert "stratification" in kinds(_model(["2*I*z1*bz1", "I*(w2+bw2)*z1*bz1"], weights=(2, 4)))


def test_stratification_violation_blocks_restriction():
    m = _model(["2*I*z1*bz1", "I*(w2+bw2)*z1*bz1"], weights=(2, 4))
    with pytest.raises(StratificationError):
        restrict_to_M(m, m.table.gen("bw2"))


def test_bloom_graham_warning_is_not_fatal():
    issues = validate_model(M7)
    assert issues and not any(v.fatal for v in issues)
    assert all(v.kind == "Bloom-Graham (ii)" for v in issues)


def test_dict_round_trip():
    for name in ("m05", "weighted_M", "quartic_lambda"):
        m = builtin_model(name)
        m2 = model_from_dict(model_to_dict(m))
        assert m2.params == m.params and m2.weights_w == m.weights_w
        assert [str(r) for r in m2.rhs] == [str(r) for r in m.rhs]


def test_malformed_files(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"cr_dim": 1,\n "codim": 1,\n "weights_w": [2] "rhs": []}')
    with pytest.raises(ModelError, match="line 3"):
        load_model(bad)
    doc = {"cr_dim": 1, "codim": 1, "weights_w": [2], "rhs": ["2*I*z1*bz1 +"]}
    with pytest.raises(ModelError, match="rhs\\[0\\]"):
        model_from_dict(doc)
    doc = {"cr_dim": 1, "codim": 1, "weights_w": [2], "rhs": ["2*I*z1*bz1"], "parameters": [{"name": "a", "domain": "complex"}]}
    with pytest.raises(ModelError, match="real"):
        model_from_dict(doc)
    with pytest.raises(ModelError):
        model_from_dict({"cr_dim": 1, "codim": 2, "weights_w": [2], "rhs": ["2*I*z1*bz1"]})


def test_model_file_schema(tmp_path):
    path = tmp_path / "h.json"
    path.write_text(json.dumps({"cr_dim": 1, "codim": 1, "weights_w": [2], "rhs": ["2*I*z1*bz1"]}))
    m = load_model(path)
    assert m.name == "h" and m.rho == 2 and m.transitive
