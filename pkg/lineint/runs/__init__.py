from __future__ import annotations

from .adaptive import AdaptiveMixin, next_stepsize
from .fixed import FixedStepMixin
from .harness import HarnessMixin, stability_scan
from .studies import StudiesMixin, error_growth_fit, per_period_error

__all__ = [
    "AdaptiveMixin",
    "FixedStepMixin",
    "HarnessMixin",
    "StudiesMixin",
    "error_growth_fit",
    "next_stepsize",
    "per_period_error",
    "stability_scan",
]
