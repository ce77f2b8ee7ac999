"""Closed convex hulls of unitary orbits of normal matrices."""
