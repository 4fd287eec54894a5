"""Spin processor package: quantum, constrained and classical spin dynamics."""
