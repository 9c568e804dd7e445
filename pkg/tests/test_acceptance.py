"""The ten acceptance criteria at their stated tolerances.

Each test prints one pass/fail line; the lines are repeated in the pytest
summary. Run ``python tests/test_acceptance.py`` for the lines alone.
"""
import sys

import pytest

from ncq.acceptance import CRITERIA, run_criterion

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # imported outside pytest's rootdir
    ACCEPTANCE_LINES = []


@pytest.mark.parametrize("number", sorted(CRITERIA), ids=lambda n: f"criterion_{n}")
def test_criterion(number):
    result = run_criterion(number)
    line = result.line()
    print(line)
    for note in result.notes:
        print(f"    note: {note}")
    ACCEPTANCE_LINES.append(line)
    assert result.passed, f"{line}\n{result.details}"


if __name__ == "__main__":
    results = [run_criterion(n) for n in sorted(CRITERIA)]
    for r in results:
        print(r.line(), flush=True)
    sys.exit(0 if all(r.passed for r in results) else 1)
