"""Core types, numerics and configuration for motsolve."""
