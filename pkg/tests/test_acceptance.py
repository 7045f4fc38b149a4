"""Release criteria, each printed as one pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as they
complete; every criterion runs at its full declared size and tolerance.
"""

import pytest

from stochgame import acceptance


@pytest.mark.parametrize("criterion", acceptance.CRITERIA,
                         ids=lambda c: c.__name__)
def test_acceptance_criterion(criterion):
    result = criterion()
    print(result.line())
    assert result.passed, result.line()
