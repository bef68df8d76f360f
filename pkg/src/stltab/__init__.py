"""Satisfiability checking for discrete-time STL."""
