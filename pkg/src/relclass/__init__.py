"""Quadratic forms over totally real fields, CM class groups, Hecke data,
and the effective class-number lower-bound cascade."""

__version__ = "0.1.0"
