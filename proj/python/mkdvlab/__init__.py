"""mkdvlab: Gibbs measures for mKdV, H_kappa flows, and Miura/KdV diagnostics.

The compiled extension carries the full API; this package re-exports it.
"""

try:
    from ._core import *  # noqa: F401,F403  (installed package layout)
except ImportError:  # pragma: no cover
    from _core import *  # noqa: F401,F403  (build-tree layout)
