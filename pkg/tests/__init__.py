"""Tests for the PAM graph lab."""
