"""Numerical engine: spaces, surfaces, spectra, parabolicity and horizontal graphs."""
