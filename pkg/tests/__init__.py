"""Test suite for motsolve."""
