"""Numerics for Szego cocycles and CMV matrices over strictly ergodic subshifts."""

__version__ = "0.1.0"
