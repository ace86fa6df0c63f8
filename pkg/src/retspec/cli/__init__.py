"""CLI for retspec."""
