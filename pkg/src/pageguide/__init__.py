"""Headless engine that grounds model answers in a webpage's element structure."""

__version__ = "0.1.0"
