"""Shared hypothesis strategies."""
from fractions import Fraction

from hypothesis import strategies as st

from covalgebra.algebra.laurent import LaurentPoly
from covalgebra.algebra.numberfield import cyclotomic_field, rational_field

FIELDS = [rational_field(), cyclotomic_field(3), cyclotomic_field(4), cyclotomic_field(5)]

small_frac = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4))


@st.composite
def field_elems(draw, field):
    return field([draw(small_frac) for _ in range(field.degree)])


@st.composite
def laurent_polys(draw, field, nvars, max_terms=3, span=3):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        e = tuple(draw(st.integers(-span, span)) for _ in range(nvars))
        terms[e] = draw(field_elems(field))
    return LaurentPoly(field, nvars, terms)


@st.composite
def laurent_units(draw, field, nvars, span=3):
    e = tuple(draw(st.integers(-span, span)) for _ in range(nvars))
    c = draw(st.integers(1, 5)) * draw(st.sampled_from([-1, 1]))
    return LaurentPoly.monomial(field, nvars, e, c)
