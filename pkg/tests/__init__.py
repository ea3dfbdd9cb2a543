"""Test suite for the f-harmonic measure laboratory."""
