"""dilat3r - minimal partially isometric dilations of row contractions"""

__version__ = "0.1.0"
