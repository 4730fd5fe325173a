"""Sharp bounds on ``E[h(Y1, Y0)]`` for supermodular ``h`` with univariate outcomes.

For supermodular ``h`` the comonotone coupling of the two conditional laws
maximizes the expectation and the antitone coupling minimizes it, covariate
value by covariate value.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..measures import ConditionalLawTable
from ..quantile_ot import coupled_expectation


def supermodular_interval(
    h: Callable[[np.ndarray, np.ndarray], np.ndarray], table: ConditionalLawTable
) -> tuple[float, float]:
    """``(lower, upper)`` for ``E[h(Y1, Y0)]``.

    ``h`` must accept two equally shaped arrays ``(y1, y0)``.  Supermodularity
    is the caller's responsibility; for other ``h`` the numbers are the values
    of the antitone and comonotone couplings, not bounds.
    """
    lower = 0.0
    upper = 0.0
    for row in table:
        lower += row.weight * coupled_expectation(h, row.law1, row.law0, antitone=True)
        upper += row.weight * coupled_expectation(h, row.law1, row.law0)
    return lower, upper
