"""Blind delegated quantum computation with one-time-pad frames and A-gate teleportation."""
