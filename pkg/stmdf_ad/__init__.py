"""
stmdf-ad: entropy-guided switching trimmed-mean anisotropic diffusion for
salt-and-pepper noise removal on 8-bit grayscale images.
"""

__version__ = "1.0.0"
