"""Arabic spelling correction over Buckwalter-transliterated text."""

__version__ = "0.1.0"
