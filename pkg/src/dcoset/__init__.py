"""Numerical toolkit for double coset spaces H\\G/K of real reductive matrix
groups: Kempf-Ness sets, gradient flows, slices and torus atlases."""

__version__ = "0.1.0"
