from fractions import Fraction as F

from hypothesis import given, strategies as st

from ceresa.rows import CSV_HEADER, TableRow, err_exponent, format_value, parse_csv, rows_to_csv
from ceresa.volume import f_N_1


def test_header_is_exact():
    assert ",".join(CSV_HEADER) == "N,m,k,value,err_exponent,verdict,prec_bits,method,elapsed_ms"
    assert rows_to_csv([]).splitlines() == [",".join(CSV_HEADER)]


def test_format_value():
    assert format_value(F(1, 3)) == "0.333333333333"
    assert format_value(F(2, 3)) == "0.666666666667"
    assert format_value(F(0)) == "0.000000000000"
    assert format_value(F(-1, 8), 2) == "-0.12"


def test_err_exponent():
    assert err_exponent(F(1, 10**6)) == -6
    assert err_exponent(F(2, 10**6)) == -5
    assert err_exponent(F(9, 10**7)) == -6
    assert err_exponent(F(1)) == 0
    assert err_exponent(F(0)) is None


def test_row_from_result_parses_back():
    r = f_N_1(7)
    row = TableRow.from_result(r)
    assert row.value.startswith("0.64691524567")
    # one ulp of the printed precision
    assert abs(F(row.value) - r.value_mod1.mid_fraction()) <= F(1, 2 * 10**12)
    assert 10 ** (row.err_exponent - 1) < r.err <= 10**row.err_exponent
    assert parse_csv(rows_to_csv([row])) == [row]


rows = st.builds(
    TableRow,
    N=st.integers(7, 10**6),
    m=st.one_of(st.none(), st.integers(2, 10**6)),
    k=st.integers(1, 500),
    value=st.fractions(0, 1).map(format_value),
    err_exponent=st.one_of(st.none(), st.integers(-400, 5)),
    verdict=st.sampled_from(["NonIntegerProven", "Inconclusive", "Error"]),
    prec_bits=st.one_of(st.none(), st.integers(1, 5000)),
    method=st.sampled_from(["series", "quadrature", "both"]),
    elapsed_ms=st.one_of(st.none(), st.integers(0, 10**8)),
)


@given(st.lists(rows, max_size=20))
def test_csv_round_trip(rs):
    assert parse_csv(rows_to_csv(rs)) == rs
