"""802.11ax spatial reuse: rule engine, analytic CTMN model and event simulator."""

__version__ = "0.1.0"
