"""Auditing whether data was used to train a model by comparing its outputs on
original and slightly transformed inputs."""

__version__ = "0.1.0"
