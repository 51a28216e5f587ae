"""Cost of universal 4G/5G mobile broadband, from regional demand to national cost lines."""

__version__ = "0.1.0"
