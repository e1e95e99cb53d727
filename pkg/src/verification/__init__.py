"""Independent LP references for small instances."""
