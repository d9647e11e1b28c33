"""Shared fixtures: session-cached preset evaluations.

Several presets are expensive (the fig6 oracle run is ~45 s); the
regression tests and the acceptance suite share one evaluation per preset
per session through this cache.
"""

from __future__ import annotations

import pytest

from qreflect.presets import regression_run

_cache: dict[str, tuple] = {}


@pytest.fixture(scope="session")
def preset_results():
    def run(name: str):
        if name not in _cache:
            _cache[name] = regression_run(name)
        return _cache[name]

    return run
