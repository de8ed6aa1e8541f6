"""Numerical verification of q-oscillator factorisation identities for U_q(sl2-hat)."""
__version__ = "0.1.0"
