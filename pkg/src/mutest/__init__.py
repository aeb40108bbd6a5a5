"""Diff-aware mutation testing over MiniLang projects."""

__version__ = "0.1.0"
