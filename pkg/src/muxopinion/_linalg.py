"""Guards shared by every solve against ``Id - ebar``."""

import numpy as np

from .errors import NumericalError

COND_MAX = 1e12


def check_conditioning(eff) -> None:
    """Reject ill-conditioned systems.

    The row-sum bound is exact arithmetic and free; the LU-based 1-norm
    estimate is only computed when the bound is inconclusive.
    """
    if eff.condition_bound <= COND_MAX:
        return
    cond = eff.condition_estimate
    if not np.isfinite(cond) or cond > COND_MAX:
        raise NumericalError(f"Id - ebar is ill-conditioned (cond ~ {cond:.3g})", condition=cond)


def check_residual(A, x, b, what: str) -> None:
    """Require ``max|A x - b| <= 1e-10 * max(1, max|b|)``."""
    res = float(np.max(np.abs(A @ x - b))) if b.size else 0.0
    bound = 1e-10 * max(1.0, float(np.max(np.abs(b))) if b.size else 0.0)
    if not res <= bound:
        raise NumericalError(f"{what}: residual {res:.3g} exceeds {bound:.3g}", residual=res)
