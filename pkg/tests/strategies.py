"""Hypothesis strategies for exact rationals."""

from __future__ import annotations

import numpy as np
from gmpy2 import mpq
from hypothesis import strategies as st

from pqc.algebra import ParaQuaternion

rationals = st.builds(lambda p, q: mpq(p, q), st.integers(-9, 9), st.integers(1, 4))
paraquaternions = st.builds(ParaQuaternion, rationals, rationals, rationals, rationals)


def rational_matrices(rows: int, cols: int):
    return st.lists(rationals, min_size=rows * cols, max_size=rows * cols).map(
        lambda vals: np.array(vals, dtype=object).reshape(rows, cols)
    )
