"""Computational kernels: geometry, sampling, complexes, persistence, statistics, trial tasks."""
