"""Variational processing of multimode squeezed light with self-configuring networks."""

__version__ = "0.1.0"
