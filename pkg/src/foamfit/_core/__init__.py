"""Row kernels for the training loop.

A *row* packs everything the stress of one data point needs, independent of
the weights::

    [i1b, i2b, j, c_i1b, c_i2b, c_j, s1, s2, s3, d1, d2, d3]

where ``c_*`` are the derivatives of the invariants along the loading path
and ``d_k`` those of the principal stretches ``s_k``.  The stress of term ``i``
at that point is ``w_i * G[:, i]``, with ``G`` returned by
``term_stress_matrix`` together with ``dG/dw*_i``.

The compiled extension is used when it imports; otherwise the numpy fallback.
Set ``FOAMFIT_PURE_PYTHON=1`` to force the fallback.
"""

import os

from ._fallback import term_stress_matrix as py_term_stress_matrix

N_COLS = 12

if os.environ.get("FOAMFIT_PURE_PYTHON"):
    term_stress_matrix = py_term_stress_matrix
    BACKEND = "python"
else:
    try:
        from ._kernels import term_stress_matrix
    except ImportError:
        term_stress_matrix = py_term_stress_matrix
        BACKEND = "python"
    else:
        BACKEND = "cython"

__all__ = ["term_stress_matrix", "py_term_stress_matrix", "BACKEND", "N_COLS"]
