"""Entropic optimal transport under martingale-type constraints."""
