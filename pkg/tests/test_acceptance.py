"""Acceptance gate: one test per criterion, each printing its pass/fail line."""

import pytest

from frakolm import acceptance


def _run(fn):
    out = fn()
    status = "PASS" if out["passed"] else "FAIL"
    print(f"[criterion {out['id']:2d}] {status}  {out['description']}  ({out['runtime_s']}s)")
    return out


@pytest.mark.parametrize("fn", acceptance.ALL_CRITERIA, ids=lambda f: f.__name__)
def test_criterion(fn):
    out = _run(fn)
    assert out["passed"], out["details"]
