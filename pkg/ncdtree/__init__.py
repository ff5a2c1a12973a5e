# ncdtree: compression-based clustering toolkit
__version__ = "0.1.0"
