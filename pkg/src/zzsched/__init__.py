"""ZZ-crosstalk-aware scheduling and pulse shaping for fixed-coupling devices."""

__version__ = "0.1.0"
