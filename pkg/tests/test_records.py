import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from twosift.affine import SiftCorrespondence
from twosift.errors import ParseError
from twosift.records import HEADER, format_correspondences, parse_correspondences, read_correspondences

coord = st.floats(-1e4, 1e4, allow_nan=False)
angle = st.floats(-10, 10, allow_nan=False)
scale = st.floats(1e-3, 1e3, allow_nan=False)


@given(st.lists(st.tuples(coord, coord, coord, coord, angle, angle, scale, scale), max_size=10))
def test_round_trip_is_exact(rows):
    cs = [SiftCorrespondence((a, b), (c, d), e, f, g, h) for a, b, c, d, e, f, g, h in rows]
    text = format_correspondences(cs, comments=["generated"])
    assert parse_correspondences(text.splitlines()) == cs


def test_comments_and_blank_lines():
    text = f"# hello\n\n{HEADER}\n# mid\n1,2,3,4,0.5,0.25,1,2\n\n"
    (c,) = parse_correspondences(text.splitlines())
    assert c.p2 == (3.0, 4.0) and c.q2 == 2.0


def test_degrees_flag():
    (c,) = parse_correspondences([HEADER, "0,0,0,0,90,180,1,1"], degrees=True)
    assert c.alpha1 == pytest.approx(math.pi / 2) and c.alpha2 == pytest.approx(math.pi)


@pytest.mark.parametrize(
    "body, line",
    [
        (["1,2,3,4,0,0,1,1", "1,2,x,4,0,0,1,1"], 3),
        (["1,2,3,4,0,0,1"], 2),
        (["1,2,3,4,0,0,1,0"], 2),
        (["1,2,3,4,0,0,1,1", "# c", "1,2,3,4,0,0,nan,1"], 4),
    ],
)
def test_parse_errors_name_the_line(body, line):
    with pytest.raises(ParseError) as info:
        parse_correspondences([HEADER] + body)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_header_must_match():
    with pytest.raises(ParseError) as info:
        parse_correspondences(["x1,y1,x2,y2,a1,a2,s1,s2", "1,2,3,4,0,0,1,1"])
    assert info.value.line == 1
    with pytest.raises(ParseError):
        parse_correspondences(["# only a comment"])


def test_read_from_file(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text(f"{HEADER}\n1,2,3,4,0,0,1,1\n")
    assert len(read_correspondences(p)) == 1
