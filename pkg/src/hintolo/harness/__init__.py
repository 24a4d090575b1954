"""Experiment runner, bound checks and CLI."""
