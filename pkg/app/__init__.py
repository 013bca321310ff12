"""Tail asymptotics of multivariate symmetric alpha-stable vectors."""
