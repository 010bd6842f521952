"""Least-squares fits used by the order and error-growth studies."""

from __future__ import annotations

import numpy as np

from lineint._logging import logger
from lineint.types.runs import ConvergenceStudy


def loglog_order(
    h: np.ndarray,
    values: np.ndarray,
    *,
    floor: float = 1e-15,
    min_ratio: float = 1.5,
) -> ConvergenceStudy:
    """Fit ``log(values) ~ p log(h)`` over a decreasing stepsize sequence.

    Points at or below *floor* are dropped, and so are trailing points whose
    value no longer shrinks by at least *min_ratio* against the previous
    fitted point (the roundoff floor).  ``order`` is *nan* when fewer than two
    points remain.
    """
    h = np.asarray(h, dtype=float)
    values = np.asarray(values, dtype=float)
    fitted = np.isfinite(values) & (values > floor)
    for i in range(len(values) - 1, 0, -1):
        if not fitted[i]:
            continue
        previous = np.flatnonzero(fitted[:i])
        if previous.size == 0 or values[previous[-1]] / values[i] >= min_ratio:
            break
        fitted[i] = False
    floor_hit = not bool(fitted.all())
    if fitted.sum() < 2:
        order = float("nan")
    else:
        order = float(np.polyfit(np.log(h[fitted]), np.log(values[fitted]), 1)[0])
    if floor_hit:
        logger.info(
            "error floor reached: fitting %d of %d points (order %.3f)",
            int(fitted.sum()),
            len(values),
            order,
        )
    return ConvergenceStudy(h=h, errors=values, order=order, fitted=fitted, floor_hit=floor_hit)


def polyfit_quality(x: np.ndarray, y: np.ndarray, degree: int) -> tuple[np.ndarray, float, float]:
    """Return ``(coefficients, r_squared, sum_of_squared_residuals)`` of a degree-*degree* fit."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    coeffs = np.polyfit(x, y, degree)
    residual = y - np.polyval(coeffs, x)
    sse = float(residual @ residual)
    spread = y - y.mean()
    sst = float(spread @ spread)
    r2 = 1.0 - sse / sst if sst > 0 else 1.0
    return coeffs, r2, sse
