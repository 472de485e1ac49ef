"""Slow-fast Leslie-Gower predator-prey model with weak Allee effect: numerical toolkit."""
