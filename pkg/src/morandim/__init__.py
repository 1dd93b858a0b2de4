"""Correlation and local dimensions of measures on Moran constructions."""
