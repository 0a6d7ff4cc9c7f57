"""Experiment orchestration, run manifests, plots and the worker pool."""
