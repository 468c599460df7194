"""Coded modulation and BICM rates and error exponents under mismatched decoding."""

__version__ = "0.1.0"
