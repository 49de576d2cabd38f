"""JSON descriptors, reports and plot data."""
