"""Finite-dimensional experiments with summing norms on l_p sequence spaces.

Modules: ``core`` (exponents, norms, sequences, tails), ``operators``
(matrices between l_p spaces and their norms), ``summing`` (pi_p estimates),
``oplimited`` (operator summability, certificates, lt_p), ``counterexamples``
(explicit non-summable constructions), ``oracle`` (brute-force references)
and ``cli``.
"""

__version__ = "0.1.0"
