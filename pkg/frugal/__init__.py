"""
frugal: LDA topic features + Fast-and-Frugal Trees for bug-report severity.
"""

__version__ = "0.1.0"
