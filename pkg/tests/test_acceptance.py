"""One line per acceptance criterion.

Run directly (python3 tests/test_acceptance.py) or through pytest; either way
a PASS/FAIL line is printed for each criterion.
"""
import json
import sys

import pytest

from hallscatter.verify import CRITERIA, run_suite

def _line(number: int, res: dict) -> str:
    status = "PASS" if res["passed"] else "FAIL"
    return f"criterion {number} [{res['name']}]: {status} ({res['seconds']} s)"


@pytest.mark.parametrize("number,name", CRITERIA, ids=[n for _, n in CRITERIA])
def test_criterion(number, name, capsys):
    res = run_suite(name)
    with capsys.disabled():
        print("\n" + _line(number, res))
    assert res["passed"], json.dumps(res["details"], default=str)[:4000]


if __name__ == "__main__":
    failed = 0
    for number, name in CRITERIA:
        res = run_suite(name)
        print(_line(number, res), flush=True)
        failed += not res["passed"]
    sys.exit(1 if failed else 0)
