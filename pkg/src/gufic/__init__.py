"""Geometric unified force-impedance control on SE(3) with energy tanks."""

__version__ = "0.1.0"
