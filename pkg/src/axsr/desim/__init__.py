"""Discrete-event simulator of RTS/CTS exchanges with OBSS/PD spatial reuse."""
from .engine import (AccountingError, MetricsReport, SimulationError, available_backends, format_trace,
                     kernel_module, run)

__all__ = ["AccountingError", "MetricsReport", "SimulationError", "available_backends", "format_trace",
           "kernel_module", "run"]
