"""Utility modules - logging."""
