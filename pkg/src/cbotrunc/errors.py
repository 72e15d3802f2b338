"""Exception types shared by the optimizer, diagnostics and harness."""

from __future__ import annotations

from typing import Optional


class ParameterError(ValueError):
    """Invalid optimizer or diagnostic parameters."""


class NonFiniteObjectiveError(ValueError):
    """The objective returned NaN or infinity for some particle."""

    def __init__(self, step: Optional[int] = None, run_index: Optional[int] = None):
        self.step = step
        self.run_index = run_index
        msg = "objective produced non-finite value"
        if step is not None:
            msg += f" at step {step}"
        if run_index is not None:
            msg += f" in run {run_index}"
        super().__init__(msg)
