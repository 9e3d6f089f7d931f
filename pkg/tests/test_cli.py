import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from offsetnerve import cli
from offsetnerve.formats import (InstanceError, MalformedBarcode, format_decimal,
                                 parse_barcode, parse_instance, serialize_barcode,
                                 serialize_instance)
from offsetnerve.generate import GeneratorFailure, random_sites
from offsetnerve.persistence import INF, Barcode

TWO_SQUARES = '{"polygons": [\n  [[0, 0], [1, 0], [1, 1], [0, 1]],\n  [[2, 0], [3, 0], [3, 1], [2, 1]]\n]}\n'
ONE_SQUARE = '{"polygons": [\n  [[0, 0], [3, 0], [3, 2], [0, 2]]\n]}\n'
RING = ('{"polygons": [[[0.01, 0], [1.01, 0], [1.01, 1], [0.01, 1]], [[3, 0], [4, 0], [4, 1], '
        '[3, 1]], [[3, 3], [4, 3], [4, 4], [3, 4]], [[0, 3], [1, 3], [1, 4], [0, 4]]]}')
FLAT_RING = RING.replace("0.01", "0").replace("1.01", "1")


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return p
    return write


def test_instance_round_trip():
    S = random_sites(12, seed=4)
    text = serialize_instance(S)
    T = parse_instance(text)
    assert [P.exact for P in T] == [P.exact for P in S]
    assert serialize_instance(T) == text
    assert serialize_instance(parse_instance(TWO_SQUARES)) == TWO_SQUARES


@given(st.integers(-10 ** 9, 10 ** 9), st.integers(0, 9))
def test_format_decimal_exact(m, k):
    v = Fraction(m, 10 ** k)
    text = format_decimal(v)
    assert Fraction(text) == v
    assert "e" not in text and not (("." in text) and text.endswith("0"))


def test_format_decimal_rejects_repeating():
    with pytest.raises(ValueError):
        format_decimal(Fraction(1, 3))


@pytest.mark.parametrize("text, match", [
    ('{"polygons": [[[0,0],[1,0],[1,1]], [[5,5],[6,5],[7,5]]]}', "polygon 1"),
    ('{"polygons": [[[0,0],[1,0],[1,"a"]]]}', "polygon 0, vertex 2"),
    ('{"polygons": [[[0,0],[1,0],[1,true]]]}', "polygon 0, vertex 2"),
    ('{"polygons": [[[0,0],[1,0],[1,NaN]]]}', "non-finite"),
    ('{"polygons": [[[0,0],[1,0]]]}', "polygon 0"),
    ('{"polygons": [[0,0]]}', "polygon 0"),
    ('{"sites": []}', "polygons"),
    ('not json', "JSON"),
])
def test_instance_errors(text, match):
    with pytest.raises((InstanceError, ValueError), match=match):
        parse_instance(text)


def test_barcode_round_trip():
    B = Barcode({0: [(0.0, INF), (0.0, 0.5), (0.0, 0.0)], 1: [(1.0, 1.5)]})
    text = serialize_barcode(B, {"pipeline": "restricted"})
    doc = json.loads(text)
    assert doc["dim0"] == [[0.0, 0.5], [0.0, "inf"]] and doc["dim1"] == [[1.0, 1.5]]
    C, meta = parse_barcode(text)
    assert C.bars == {0: [(0.0, 0.5), (0.0, INF)], 1: [(1.0, 1.5)]} and meta["pipeline"] == "restricted"
    assert serialize_barcode(C, meta) == text
    assert json.loads(serialize_barcode(B, {}, show_zero=True))["dim0"][0] == [0.0, 0.0]


@pytest.mark.parametrize("text", ['{"dim0": []}', '{"dim0": [[1]], "dim1": []}',
                                  '{"dim0": [[1, 0]], "dim1": []}', '[]',
                                  '{"dim0": [["a", 1]], "dim1": []}'])
def test_malformed_barcodes(text):
    with pytest.raises(MalformedBarcode):
        parse_barcode(text)


def test_exact_two_squares(files, capsys):
    code, out, err = run(["exact", files("a.json", TWO_SQUARES)], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["dim0"] == [[0.0, 0.5], [0.0, "inf"]] and doc["dim1"] == []
    assert doc["meta"] == {"pipeline": "restricted", "n_sites": 2, "filtration_size": 3,
                           "elapsed_seconds": None}
    assert "restricted" in err


def test_exact_single_polygon(files, capsys):
    doc = json.loads(run(["exact", files("a.json", ONE_SQUARE)], capsys)[1])
    assert doc["dim0"] == [[0.0, "inf"]] and doc["dim1"] == []


def test_exact_vs_cech_sizes(files, capsys):
    inst = files("a.json", serialize_instance(random_sites(10, seed=1)))
    exact = json.loads(run(["exact", inst], capsys)[1])["meta"]["filtration_size"]
    cech = json.loads(run(["cech", inst], capsys)[1])["meta"]["filtration_size"]
    assert cech == 175 and exact < 100


@pytest.mark.parametrize("n, size", [(1, 1), (4, 14)])
def test_cech_small_sizes(files, capsys, n, size):
    inst = files("a.json", serialize_instance(random_sites(n, seed=2)))
    assert json.loads(run(["cech", inst], capsys)[1])["meta"]["filtration_size"] == size


def test_timing_flag(files, capsys):
    inst = files("a.json", TWO_SQUARES)
    meta = json.loads(run(["exact", inst, "--timing"], capsys)[1])["meta"]
    assert isinstance(meta["elapsed_seconds"], float)


@pytest.mark.parametrize("eps", [1, 0.5, 0.1])
def test_sample_epsilons(files, capsys, eps, tmp_path):
    inst = files("a.json", serialize_instance(random_sites(10, seed=1)))
    code, out, _ = run(["sample", inst, "--eps", eps, "--points", tmp_path / "p.txt"], capsys)
    meta = json.loads(out)["meta"]
    assert code == 0 and meta["pipeline"] == "sample" and meta["epsilon"] == eps
    rows = (tmp_path / "p.txt").read_text().splitlines()
    assert rows and all(len(r.split()) == 2 for r in rows)


def test_sample_single_square(files, capsys):
    doc = json.loads(run(["sample", files("a.json", ONE_SQUARE), "--eps", 0.5], capsys)[1])
    assert all(d - b <= 0.5 for b, d in doc["dim1"])


def test_usage_errors(capsys):
    for argv in (["gen", 0], ["sample", "x.json", "--eps", 0], ["sample", "x.json", "--eps", -1],
                 ["bench", "--sizes", 5, "--seeds"], ["bench", "--sizes", "--seeds", 1]):
        with pytest.raises(SystemExit) as exc:
            cli.main([str(a) for a in argv])
        assert exc.value.code == 2
    capsys.readouterr()


def test_exit_codes(files, capsys, monkeypatch):
    bad = files("bad.json", '{"polygons": [[[0,0],[1,0],[2,0]]]}')
    code, out, err = run(["exact", bad], capsys)
    assert code == 2 and out == "" and "polygon 0" in err
    assert run(["exact", files("blank.json", "")], capsys)[0] == 2
    assert run(["exact", files("deg.json", FLAT_RING)], capsys)[0] == 3
    assert run(["cech", files("a.json", TWO_SQUARES), "--cech-cap", 1], capsys)[0] == 4
    assert run(["sample", files("a.json", TWO_SQUARES), "--eps", 1e-5], capsys)[0] == 5
    assert run(["compare", bad, bad], capsys)[0] == 6
    assert run(["plot", bad], capsys)[0] == 6

    def fail(n, seed):
        raise GeneratorFailure("no room")
    monkeypatch.setattr(cli, "random_sites", fail)
    assert run(["gen", 5], capsys)[0] == 7


def test_gen_deterministic(capsys):
    a = run(["gen", 10, "--seed", 1], capsys)[1]
    b = run(["gen", 10, "--seed", 1], capsys)[1]
    c = run(["gen", 10, "--seed", 2], capsys)[1]
    assert a == b != c
    S = parse_instance(a)
    assert len(S) == 10 and all(3 <= len(P) <= 5 for P in S)
    assert all(0 <= v <= 100 for P in S for xy in P.exact for v in xy)


def test_compare(files, capsys, tmp_path):
    inst = files("a.json", serialize_instance(random_sites(8, seed=3)))
    run(["exact", inst, "--out", tmp_path / "e.json"], capsys)
    run(["sample", inst, "--eps", 0.5, "--out", tmp_path / "s.json"], capsys)
    out = run(["compare", tmp_path / "e.json", tmp_path / "e.json"], capsys)[1]
    assert out.splitlines() == ["dim0 bottleneck 0.0 bars 8 8 diff 0",
                                "dim1 bottleneck 0.0 bars " + out.splitlines()[1].split("bars ")[1]]
    out = run(["compare", tmp_path / "e.json", tmp_path / "s.json"], capsys)[1]
    dists = [float(line.split()[2]) for line in out.splitlines()]
    assert all(d <= 0.5 for d in dists)
    empty = files("empty.json", '{"dim0": [], "dim1": []}')
    out = run(["compare", tmp_path / "e.json", empty], capsys)[1]
    assert out.splitlines()[0].startswith("dim0 bottleneck inf")


def test_plot(files, capsys):
    empty = run(["plot", files("e.json", '{"dim0": [], "dim1": []}')], capsys)[1]
    assert empty.startswith("<svg") and 'class="dim' not in empty and 'class="axis"' in empty
    two = files("two.json", json.dumps({"dim0": [[0, 0.5], [0, "inf"]], "dim1": []}))
    svg = run(["plot", two], capsys)[1]
    assert svg.count('stroke="red"') == 2 and 'stroke="blue"' not in svg
    assert svg.count('marker-end="url(#arrow)"') == 1
    ring = files("ring.json", RING)
    code, out, _ = run(["exact", ring], capsys)
    svg = run(["plot", files("rb.json", out)], capsys)[1]
    assert svg.count('class="dim0"') == 4 and svg.count('class="dim1"') == 1


def test_bench(capsys):
    code, out, err = run(["bench", "--sizes", 4, 6, "--seeds", 1, 2, "--eps", 1,
                          "--cech-cap", 5], capsys)
    rows = [r.split(",") for r in out.splitlines()]
    assert code == 0 and rows[0] == list(cli.BENCH_COLUMNS)
    assert [r[0] for r in rows[1:]] == ["restricted", "cech", "sample(eps=1)"] * 2
    assert rows[5][2:] == ["-"] * 4 and rows[2][2] == "14"
    assert "bench" in err
