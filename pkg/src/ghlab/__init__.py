"""Global hypoellipticity checks for sum-of-squares operators on T^n x G."""

__version__ = "0.1.0"
