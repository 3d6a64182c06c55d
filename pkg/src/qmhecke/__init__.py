"""Exact computation with quasimodular forms and quasimodular Hecke operators."""

__version__ = "0.1.0"
