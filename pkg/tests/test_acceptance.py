"""Acceptance gate: every numbered criterion runs at its stated tolerance.

Each test prints the criterion's one-line verdict and then asserts it.
No tolerances are loosened here; a criterion that cannot reach its
pinned reference value fails loudly with the measured numbers in the
assertion message.
"""
import pytest

from ellipsim.acceptance import CRITERIA, run_criterion

SUITE_SEED = 0


@pytest.mark.parametrize(
    "number, name",
    [(num, name) for num, name, _ in CRITERIA],
    ids=[f"{num:02d}-{name}" for num, name, _ in CRITERIA],
)
def test_criterion(number, name):
    result = run_criterion(number, seed=SUITE_SEED)
    print(result.summary_line())
    assert result.name == name
    assert result.passed, result.message or f"criterion {number} failed"


def test_registry_is_complete():
    numbers = [num for num, _, _ in CRITERIA]
    assert numbers == list(range(1, 12))


def test_unknown_criterion_number():
    with pytest.raises(ValueError, match="no criterion numbered"):
        run_criterion(99)
