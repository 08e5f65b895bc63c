"""Trajectory experiments, statistics and figure presets."""
