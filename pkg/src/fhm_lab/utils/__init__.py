"""Utility helpers for fhm-lab (no eager imports)."""
