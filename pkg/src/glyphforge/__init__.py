"""glyphforge: dysgraphia screening and character-level OCR for handwriting
pages, with a human-in-the-loop labeling service."""

__version__ = "0.1.0"
