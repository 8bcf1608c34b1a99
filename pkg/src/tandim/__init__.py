"""Covering/packing counts, tangential and local box dimensions, translation
fractal generators, and tangent-cone verification tools."""

__version__ = "0.1.0"
