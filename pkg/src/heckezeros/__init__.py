"""Hecke L-functions of imaginary quadratic fields, built from binary
quadratic forms: coefficient systems, critical-line evaluation, zero
accounting, mollified moments, and value-distribution statistics."""

__version__ = "0.1.0"
