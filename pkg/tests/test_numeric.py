from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from signedshift.numeric import (
    CompensatedSum,
    ExactComplex,
    modulus,
    parse_scalar,
    to_cplx,
    to_exact,
)


def test_exact_complex_field_ops():
    a = ExactComplex(Fraction(1, 3), Fraction(2))
    b = ExactComplex(Fraction(-1, 2), Fraction(1, 5))
    assert (a + b) - b == a
    assert a * b == b * a
    assert (a * b) / b == a
    assert -(-a) == a
    assert a + 1 == ExactComplex(Fraction(4, 3), Fraction(2))
    assert 2 * a == ExactComplex(Fraction(2, 3), Fraction(4))


def test_exact_complex_division_exact():
    a = ExactComplex(Fraction(1), Fraction(1))
    b = ExactComplex(Fraction(0), Fraction(3))
    assert a / b == ExactComplex(Fraction(1, 3), Fraction(-1, 3))
    with pytest.raises(ZeroDivisionError):
        a / ExactComplex(Fraction(0), Fraction(0))


def test_exact_complex_rejects_float_operands():
    a = ExactComplex(Fraction(1), Fraction(0))
    with pytest.raises(TypeError):
        a * 0.5  # silent degradation to binary floats is the whole bug class


def test_to_exact_roundtrips_floats_losslessly():
    x = 0.1 + 0.7j
    e = to_exact(x)
    assert to_cplx(e) == x
    assert float(e.re) == 0.1 and float(e.im) == 0.7


@given(st.integers(-100, 100), st.integers(1, 50), st.integers(-100, 100), st.integers(1, 50))
def test_exact_complex_matches_complex_arithmetic(p, q, r, s):
    a = ExactComplex(Fraction(p, q), Fraction(r, s))
    b = ExactComplex(Fraction(r, q), Fraction(p, s))
    assert to_cplx(a * b) == pytest.approx(to_cplx(a) * to_cplx(b), rel=1e-14, abs=1e-14)
    assert to_cplx(a + b) == pytest.approx(to_cplx(a) + to_cplx(b), rel=1e-15, abs=1e-15)


def test_modulus_exact_on_axes():
    assert modulus(ExactComplex(Fraction(-3, 7), Fraction(0))) == Fraction(3, 7)
    assert modulus(ExactComplex(Fraction(0), Fraction(5))) == 5
    assert modulus(Fraction(-2)) == 2
    assert modulus(3 + 4j) == 5.0


@pytest.mark.parametrize(
    "text,expected",
    [
        ("3", 3),
        ("-2/7", Fraction(-2, 7)),
        ("0.5", Fraction(1, 2)),
        ("1e3", Fraction(1000)),
        ("1+2j", ExactComplex(Fraction(1), Fraction(2))),
        ("3/4-1/2j", ExactComplex(Fraction(3, 4), Fraction(-1, 2))),
        ("j", ExactComplex(Fraction(0), Fraction(1))),
        ("-j", ExactComplex(Fraction(0), Fraction(-1))),
        ("2.5j", ExactComplex(Fraction(0), Fraction(5, 2))),
    ],
)
def test_parse_scalar(text, expected):
    assert parse_scalar(text) == expected


def test_parse_scalar_rejects_junk():
    with pytest.raises(ValueError):
        parse_scalar("not-a-number")


def test_compensated_sum_beats_plain_sum():
    acc = CompensatedSum()
    plain = 0.0
    terms = [1e16, 1.0, -1e16, 1.0] * 100
    for t in terms:
        acc.add(t)
        plain += t
    assert acc.value() == 200.0
    assert plain != 200.0  # the control: plain accumulation loses the ones
