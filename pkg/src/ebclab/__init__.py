"""Thin-layer heat conduction on a spherical geometry and its effective interface problems."""

__version__ = "0.1.0"
