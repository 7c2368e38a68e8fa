"""
PAM graph lab

Parabolic Anderson model on Galton-Watson trees and configuration-model graphs:
double-exponential potentials -> islands -> principal eigenvalues ->
variational constants -> total mass U(t) -> Lyapunov reports and certificates.
"""

__version__ = "0.1.0"
