"""Polar codes with SC, SCL, CA-SCL and Fast-SSC-List decoding plus an unrolled pipeline model."""

__version__ = "0.1.0"
