"""File utilities for motsolve."""
