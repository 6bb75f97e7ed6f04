import pytest

from knotdyn.errors import IntegerOverflowError, TangleSyntaxError
from knotdyn.notation import format_expr, parse_tangle
from knotdyn.rational import ExtendedRational
from knotdyn.tangles import (
    CF,
    Family,
    InfinityTangle,
    IntegerTangle,
    Mirror,
    Numerator,
    Rot,
    Star,
    Sum,
    VerticalTangle,
    eval_fraction,
)


class TestParse:
    def test_cf_literal(self):
        assert parse_tangle("(1,2,2)") == CF((1, 2, 2))

    def test_bracket_pair(self):
        assert parse_tangle("[11.10]") == Family("BracketPair", 11, 10)

    def test_numerator_of_sum(self):
        assert parse_tangle("N((2,3,4)+(3,2,2))") == Numerator(
            Sum(CF((2, 3, 4)), CF((3, 2, 2)))
        )

    def test_difference_is_mirror(self):
        assert parse_tangle("N((1,2,3)-(1,2))") == Numerator(
            Sum(CF((1, 2, 3)), Mirror(CF((1, 2))))
        )

    def test_atoms(self):
        assert parse_tangle("[3]") == IntegerTangle(3)
        assert parse_tangle("[-2]") == IntegerTangle(-2)
        assert parse_tangle("[inf]") == InfinityTangle()
        assert parse_tangle("1/[-2]") == VerticalTangle(-2)
        assert parse_tangle("rot([2])") == Rot(IntegerTangle(2))
        assert parse_tangle("[[4]]") == CF((1, 1, 1, 1))
        assert parse_tangle("[[0]]") == CF(())

    def test_star_chain(self):
        assert parse_tangle("[3]*1/[-2]") == Star(IntegerTangle(3), VerticalTangle(-2))
        assert parse_tangle("[1]*[2]*[3]") == Star(
            Star(IntegerTangle(1), IntegerTangle(2)), IntegerTangle(3)
        )

    def test_worked_tangle(self):
        t = parse_tangle("[3]*1/[-2]+[2]")
        assert eval_fraction(t) == ExtendedRational(7, 5)

    def test_families(self):
        assert parse_tangle("U(10)") == Family("U", 10)
        assert parse_tangle("K(11;(7,7,7,7))") == Family("K", 11, payload=(7, 7, 7, 7))
        assert parse_tangle("D([0])") is not None

    def test_whitespace(self):
        assert parse_tangle(" N( (1, 2) - (1) ) ") == Numerator(
            Sum(CF((1, 2)), Mirror(CF((1,))))
        )

    def test_syntax_error_offset(self):
        with pytest.raises(TangleSyntaxError) as err:
            parse_tangle("N((1,2)")
        assert err.value.offset == 7
        with pytest.raises(TangleSyntaxError) as err:
            parse_tangle("(1,,2)")
        assert err.value.offset == 3

    def test_trailing_garbage(self):
        with pytest.raises(TangleSyntaxError):
            parse_tangle("[3] junk")

    def test_overflow(self):
        with pytest.raises(IntegerOverflowError):
            parse_tangle(f"[{2**63}]")
        assert parse_tangle(f"[{2**63 - 1}]") == IntegerTangle(2**63 - 1)


class TestRoundTrip:
    CASES = [
        "(1,2,2)",
        "[11.10]",
        "N((2,3,4)+(3,2,2))",
        "N((1,2,3)-(1,2))",
        "[3]*1/[-2]+[2]",
        "rot([2]+[3])*[inf]",
        "U(10)",
        "K(11;(7,7,7,7))",
        "D((0,2))",
        "N([[5]]-[[4]])",
        "[0]",
        "1/[0]",
    ]

    @pytest.mark.parametrize("text", CASES)
    def test_parse_format_parse_fixed_point(self, text):
        tree = parse_tangle(text)
        printed = format_expr(tree)
        assert parse_tangle(printed) == tree
        # printing is idempotent on its own output
        assert format_expr(parse_tangle(printed)) == printed

    def test_mirror_pushdown_for_programmatic_trees(self):
        tree = Mirror(CF((1, 2)))
        printed = format_expr(tree)
        assert eval_fraction(parse_tangle(printed)) == eval_fraction(tree)
