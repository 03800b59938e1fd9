"""Reactive synthesis from assume-guarantee contracts by validity-guided fixpoint refinement."""
__version__ = "0.1.0"
