"""Filter convergence on ℕ at desk scale: modulus functions, f-densities, filters,
limits and Cauchy checks in finite models of sequence spaces, and a gallery of
reproducible experiments."""

__version__ = "0.1.0"
