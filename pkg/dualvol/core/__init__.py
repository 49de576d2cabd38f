"""Sphere geometry, star sets, radial algebra and dual mixed volumes."""
