"""Desk-scale simulator for magnetically actuated Kresling-origami millirobots."""

__version__ = "0.1.0"
