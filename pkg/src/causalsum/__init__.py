"""Probabilistic and causal reasoning with summation: a formula language, exact
model semantics, a bounded satisfiability procedure, a proof checker, and
circuit-encoded ETR trees."""

__version__ = "0.1.0"
