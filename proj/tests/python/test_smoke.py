import json

import pytest

import coalg

DEADLOCK_LOOP = json.dumps(
    {
        "functor": "P(Id)",
        "carrier": ["s", "t"],
        "structure": {"s": {"set": []}, "t": {"set": [{"id": "t"}]}},
    }
)

LTS = json.dumps(
    {
        "functor": "P(C{a,b} * Id)",
        "carrier": ["x0", "x1", "y0"],
        "structure": {
            "x0": {"set": [{"pair": [{"c": "a"}, {"id": "x1"}]}]},
            "x1": {"set": [{"pair": [{"c": "b"}, {"id": "x0"}]}]},
            "y0": {"set": [{"pair": [{"c": "a"}, {"id": "x1"}]}]},
        },
    }
)


def test_round_trip():
    c = coalg.Coalgebra.loads(DEADLOCK_LOOP)
    assert len(c) == 2
    assert c.carrier == ["s", "t"]
    assert coalg.Coalgebra.loads(c.dumps()) == c


def test_distinguishing_formula():
    c = coalg.Coalgebra.loads(DEADLOCK_LOOP)
    assert not coalg.bisimilar(c, "s", "t")
    f = coalg.distinguishing_formula(c, "s", "t")
    assert f == "O [] {false}"
    assert coalg.extension(c, f) == ["s"]


def test_minimize():
    c = coalg.Coalgebra.loads(LTS)
    assert coalg.behavioural_equivalence(c) == [["x0", "y0"], ["x1"]]
    assert coalg.distinguishing_formula(c, "x0", "y0") is None
    assert len(coalg.minimize(c)) == 2


def test_functors():
    assert coalg.normalize_functor("P(C{b,a}*Id)") == "P(C{a,b} * Id)"
    assert coalg.cardinality("P(Id)", 3) == 8
    assert coalg.cardinality("D(Id)", 2, 2) == 3
    assert coalg.check_functor_laws("N(Id)", 2)


def test_kvalid():
    assert coalg.kvalid("[](p -> q) -> ([]p -> []q)")["valid"]
    r = coalg.kvalid("[]p -> p", 1)
    assert not r["valid"]
    assert r["countermodel_checked"]
    assert r["state"] in r["countermodel"].carrier


def test_lindenbaum_and_stone():
    assert coalg.lindenbaum_atoms(0, 2, pow_only=True) == [1, 2, 4]
    assert coalg.lindenbaum_atoms(1, 1) == [2, 8]
    d = coalg.stone(json.dumps({"generators": ["g", "h"], "relations": [["g & h", "bot"]]}))
    assert len(d["atoms"]) == 3
    assert d["rho_iso"] and d["sigma_bijective"]


def test_errors():
    with pytest.raises(coalg.ParseError):
        coalg.Coalgebra.loads('{"functor": "P(Id)", "carrier": ["s"] }x')
    with pytest.raises(coalg.ParseError):
        coalg.normalize_formula("O [] (")
    with pytest.raises(coalg.CapExceeded):
        coalg.kvalid("[][][]p", 1, cap=10)
    assert issubclass(coalg.CapExceeded, coalg.CoalgError)


def test_selftest():
    assert "delta-naturality" in coalg.selftest_properties()
    r = coalg.selftest(seed=2, only="delta-naturality")
    assert r["ok"]
    assert [p["name"] for p in r["properties"]] == ["delta-naturality"]
