"""CLI package for the PAM graph lab."""
