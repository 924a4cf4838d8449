import pytest

from lawfuse.fol import parse_rulebase

FIG_RULEBASE = """\
pred P1 @264 : "steals a relatively large amount of private property"
pred P2 @264 : "steals a relatively large amount of public property"
pred P3 @264 : "commits theft repeatedly"
article 264 chapter 5 : (P1 | P2 | P3) -> "crime of theft"
"""


@pytest.fixture
def theft_rulebase():
    return parse_rulebase(FIG_RULEBASE)
