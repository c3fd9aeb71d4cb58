"""
Root-Cause Toolkit

Classifies bug reports into nine root-cause categories and characterizes
each category by topic and time to fix.
"""

__version__ = "1.0.0"
