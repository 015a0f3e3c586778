"""Desk-scale search and verification for restricted Hindman-type theorems."""

__version__ = "0.1.0"
