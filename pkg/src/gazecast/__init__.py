"""Stochastic pedestrian trajectory forecasting with gaze-supervised attention."""

__version__ = "0.1.0"
