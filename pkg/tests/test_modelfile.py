import numpy as np
import pytest

from primalbp.generators import random_model
from primalbp.modelfile import ModelFileError, parse_model, read_model, serialize_model, write_model

from conftest import DATA

T1_TEXT = """GIBBS-LOG 1
2
2 2
1
2 0 1
0 0
0 0
0 0 0 0
"""


def test_parse_t1(t1):
    m = parse_model(T1_TEXT)
    assert m.graph == t1.graph
    assert np.array_equal(m.theta.flat(), t1.theta.flat())


def test_comments_and_spanning_tokens():
    text = "GIBBS-LOG 1  # header\n2\n2 2 # sizes\n1\n2 0 1\n0\n0 0 0\n0 0\n0 0 # split table\n"
    m = parse_model(text)
    assert m.higher[0].shape == (2, 2)


def test_row_major_order():
    m = parse_model("GIBBS-LOG 1\n2\n2 3\n1\n2 0 1\n0 0\n0 0 0\n1 2 3 4 5 6\n")
    assert m.higher[0][0, 2] == 3.0
    assert m.higher[0][1, 0] == 4.0


@pytest.mark.parametrize(
    "text, line, match",
    [
        ("GIBBS-LOG 2\n1\n2\n0\n0 0\n", 1, "version"),
        ("GIBBS 1\n", 1, "header"),
        ("GIBBS-LOG 1\n2\n2 2\n1\n1 0\n0 0\n0 0\n0 0\n", 5, "arity 1"),
        ("GIBBS-LOG 1\n2\n2 2\n1\n2 0 5\n0 0\n0 0\n0 0 0 0\n", 5, "out of range"),
        ("GIBBS-LOG 1\n2\n2 2\n1\n2 1 0\n0 0\n0 0\n0 0 0 0\n", 5, "ascending"),
        ("GIBBS-LOG 1\n2\n2 2\n1\n2 0 1\n0 0\n0 inf\n0 0 0 0\n", 7, "non-finite"),
        ("GIBBS-LOG 1\n2\n2 2\n1\n2 0 1\n0 0\n0 0\n0 0 0\n", 8, "end of file"),
        ("GIBBS-LOG 1\n2\n2 2\n1\n2 0 1\n0 0\n0 0\n0 0 0 0 7\n", 8, "trailing"),
        ("GIBBS-LOG 1\n2\n2 x\n", 3, "integer"),
        ("GIBBS-LOG 1\n1\n2\n0\n0 abc\n", 5, "real"),
    ],
)
def test_errors_carry_line_numbers(text, line, match):
    with pytest.raises(ModelFileError, match=match) as err:
        parse_model(text)
    assert err.value.line == line
    assert f"line {line}" in str(err.value)


def test_duplicate_edge_rejected():
    text = "GIBBS-LOG 1\n2\n2 2\n2\n2 0 1\n2 0 1\n0 0\n0 0\n0 0 0 0\n0 0 0 0\n"
    with pytest.raises(ModelFileError, match="duplicate"):
        parse_model(text)


def test_roundtrip_exact(rng):
    for _ in range(20):
        m = random_model(rng, scale=10.0)
        back = parse_model(serialize_model(m))
        assert back.graph == m.graph
        assert np.array_equal(back.theta.flat(), m.theta.flat())


@pytest.mark.parametrize("name", ["T1", "T2", "L1", "T1bad", "chain3", "loopy_mixed", "grid3x3", "frustrated_k5"])
def test_golden_files_idempotent(name, tmp_path):
    m = read_model(DATA / f"{name}.gl")
    text = serialize_model(m)
    assert serialize_model(parse_model(text)) == text
    write_model(m, tmp_path / "x.gl")
    assert (tmp_path / "x.gl").read_text() == text
