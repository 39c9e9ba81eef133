"""Contractible-closed-orbit index of Beltrami fields on a solid torus."""

__version__ = "0.1.0"
