"""Solvers that maximize a dual potential."""
