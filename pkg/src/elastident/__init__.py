"""Symbolic derivation and numerical verification of dilational integral
identities (Pohozhaev- and Morawetz-type) for linearly elastic systems with
nonlinear body forces, plus a non-existence certificate on star-shaped
domains."""

__version__ = "0.1.0"
