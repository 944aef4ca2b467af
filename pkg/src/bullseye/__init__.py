"""Trace-driven TAGE-SC-L simulator with the Bullseye H2P perceptron subsystem."""

__version__ = "0.1.0"
