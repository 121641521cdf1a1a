"""Symbolic-numeric verification of Lie point symmetries of u_t^(alpha) = u_xx + u_x^2."""

__version__ = "0.1.0"
