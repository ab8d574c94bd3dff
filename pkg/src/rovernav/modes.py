"""Terrain classes and navigation modes, with their shared severity order.

The same total order drives everything downstream: which navigation mode a
classification activates, which mode's map data wins a merge conflict, and
how mode-switch hysteresis is applied.
"""

from __future__ import annotations

import enum


class TerrainClass(enum.Enum):
    """Terrain complexity category: flat < rocky < challenging."""

    FLAT = "flat"
    ROCKY = "rocky"
    CHALLENGING = "challenging"

    @property
    def severity(self) -> int:
        return _CLASS_SEVERITY[self]

    def __lt__(self, other: "TerrainClass") -> bool:
        return self.severity < other.severity

    def __le__(self, other: "TerrainClass") -> bool:
        return self.severity <= other.severity


class NavMode(enum.Enum):
    """Navigation mode: efficient < safe < conservative (priority order)."""

    EFFICIENT = "efficient"
    SAFE = "safe"
    CONSERVATIVE = "conservative"

    @property
    def priority(self) -> int:
        return _MODE_PRIORITY[self]


_CLASS_SEVERITY = {
    TerrainClass.FLAT: 0,
    TerrainClass.ROCKY: 1,
    TerrainClass.CHALLENGING: 2,
}

_MODE_PRIORITY = {
    NavMode.EFFICIENT: 1,
    NavMode.SAFE: 2,
    NavMode.CONSERVATIVE: 3,
}

# Priority 0 is reserved for "no data yet" in the global map source layer.
SOURCE_NONE = 0

MODE_FOR_CLASS = {
    TerrainClass.FLAT: NavMode.EFFICIENT,
    TerrainClass.ROCKY: NavMode.SAFE,
    TerrainClass.CHALLENGING: NavMode.CONSERVATIVE,
}

CLASS_FOR_MODE = {mode: cls for cls, mode in MODE_FOR_CLASS.items()}
