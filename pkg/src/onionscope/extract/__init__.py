"""Markup parsing, text cleaning, and cryptocurrency address extraction."""
