"""Characterization pipelines - measure recovery, diagnostics, valuation."""
