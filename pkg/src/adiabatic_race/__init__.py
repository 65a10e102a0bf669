"""SAT-to-Ising reduction, adiabatic simulation, and the brute-force race against it."""

__version__ = "0.1.0"
