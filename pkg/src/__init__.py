"""Wild Data Toolkit - smooth wild initial data for 2-D isentropic Euler."""

__version__ = "0.1.0"
