"""Round-limited local search and discrete fixed-point search on grids."""

from __future__ import annotations

__version__ = "0.1.0"
