"""Extended coupon collector's problem: exact values, simulation, limit laws."""

from ccp.kernels import KERNEL

__version__ = "0.1.0"

__all__ = ["KERNEL", "__version__"]
