"""
Test package for orbit-hull.
"""
