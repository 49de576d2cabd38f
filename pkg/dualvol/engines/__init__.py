"""Integration back-ends - exact common refinement and Monte Carlo."""
