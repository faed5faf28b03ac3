"""Stern-Brocot and Diophantine pressure, multifractal spectra and growth rates."""
__version__ = "0.1.0"
