"""
Shared pytest setup.

Tests marked `slow` replay the full-size acceptance runs (minutes to hours).
They are skipped unless UCRLB_SLOW=1:

    UCRLB_SLOW=1 python -m pytest tests/ -v -m slow
"""

import os

import pytest

SLOW_ENV = "UCRLB_SLOW"


def pytest_configure(config):
    config.addinivalue_line("markers", f"slow: full-size acceptance run, enabled by {SLOW_ENV}=1")


def pytest_collection_modifyitems(config, items):
    if os.environ.get(SLOW_ENV) == "1":
        return
    skip = pytest.mark.skip(reason=f"full-size run; set {SLOW_ENV}=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)
