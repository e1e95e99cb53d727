"""Experiment orchestration, warm starts and reports."""
