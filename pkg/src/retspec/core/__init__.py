"""Core numerics for retspec."""
