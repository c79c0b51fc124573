"""Logging and numerical helpers."""
