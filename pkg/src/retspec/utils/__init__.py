"""Utility modules for retspec."""
