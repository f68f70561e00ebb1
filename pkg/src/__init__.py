"""Gasket Energy - harmonic structures and energy measures on level-l Sierpinski gaskets."""

__version__ = "0.1.0"
