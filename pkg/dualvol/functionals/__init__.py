"""Functional system - base classes, kernels, gallery, registry, checks, auditor."""
