"""Per-run counters reported at the end of a convergence run."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass
class RunDiagnostics:
    """Counters for one experiment run, filled in trajectory-index order."""

    trajectories_completed: int = 0
    unitaries_drawn: int = 0
    iterations_evolved: int = 0
    max_trace_drift: float = 0.0

    def record_trajectory(self, unitaries: int, iterations: int, trace_drift: float) -> None:
        self.trajectories_completed += 1
        self.unitaries_drawn += unitaries
        self.iterations_evolved += iterations
        if trace_drift > self.max_trace_drift:
            self.max_trace_drift = trace_drift

    def to_dict(self) -> dict:
        return {
            "trajectories_completed": self.trajectories_completed,
            "unitaries_drawn": self.unitaries_drawn,
            "iterations_evolved": self.iterations_evolved,
            "max_trace_drift": self.max_trace_drift,
        }

    def summary(self) -> str:
        lines = [
            f"Trajectories completed: {self.trajectories_completed}",
            f"Unitaries drawn: {self.unitaries_drawn}",
            f"Iterations evolved: {self.iterations_evolved}",
        ]
        if self.max_trace_drift > 0:
            lines.append(f"  ↳ Max trace drift: {self.max_trace_drift:.3e}")
        return "\n".join(lines)
