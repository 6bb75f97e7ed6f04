"""Hot numerical kernels with a compiled core and a NumPy fallback.

The compiled extension (`knotdyn.kernels._fast`, built from Cython) is
preferred when importable; otherwise the pure NumPy implementation in
`_ref` is used.  Setting the environment variable KNOTDYN_PURE_PYTHON=1
forces the fallback.  `BACKEND` names the active implementation.

Within one backend every kernel accumulates in a fixed order, so results
are bitwise reproducible run to run.  Across backends results agree to
floating-point tolerance, not bitwise.
"""

import os

from . import _project, _ref

BACKEND = "python"
_impl = _ref
project_edges = _project.project_edges
tangent_project_forces = _project.tangent_project_forces

if not os.environ.get("KNOTDYN_PURE_PYTHON"):
    try:
        from . import _fast as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
        project_edges = _impl.project_edges
        tangent_project_forces = _impl.tangent_project_forces
    except ImportError:
        pass

simon_energy = _impl.simon_energy
repulsion_forces = _impl.repulsion_forces
repulsion_potential = _impl.repulsion_potential
spring_forces = _impl.spring_forces
spring_potential = _impl.spring_potential
min_segment_gap = _impl.min_segment_gap
segment_clearances = _impl.segment_clearances
swept_crossing = _impl.swept_crossing

__all__ = [
    "BACKEND",
    "simon_energy",
    "repulsion_forces",
    "repulsion_potential",
    "spring_forces",
    "spring_potential",
    "min_segment_gap",
    "segment_clearances",
    "swept_crossing",
    "project_edges",
    "tangent_project_forces",
]
