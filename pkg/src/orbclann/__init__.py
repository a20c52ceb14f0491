"""Exact algebras from triangulated orbifold surfaces.

The package builds, from a triangulated surface with orbifold points of
weights 1 and 4 and a two-valued twisting cocycle, two finite-dimensional
algebras over an exact coefficient field — a tensor-path quotient defined by a
potential, and a semilinear clannish bound-quiver algebra — and verifies that
their module categories match, down to explicit functors, on concrete module
samples.
"""

__version__ = "0.1.0"
