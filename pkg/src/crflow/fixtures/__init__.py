"""Bundled triangulation fixtures.

``twelve_tet.json`` is a 12-tetrahedron properly glued ideal triangulation
with two torus cusps and one genus-6 boundary component: every tetrahedron
has one ideal vertex, every ideal edge class has valence 6 and the single
hyper-ideal edge class has valence 36.  ``twelve_tet.expected.json`` records
the derived quantities the test suite pins against.
"""

from importlib import resources
from pathlib import Path

__all__ = ["path"]


def path(name: str) -> Path:
    """Filesystem path of a bundled fixture file."""
    return Path(resources.files(__package__) / name)
