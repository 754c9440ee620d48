"""Levinson's theorem as an index pairing, checked numerically for radial
Schrodinger operators: bound-state counts, phase shifts, the winding of
det S(lambda) and Fredholm indices of the model wave operator and the Hardy
pairing."""

__version__ = "0.1.0"
