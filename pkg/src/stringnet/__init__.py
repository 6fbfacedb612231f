"""Abelian Z_N string-net tensor families and their stochastic-automaton mapping.

Subpackage layout:

  zn         -- Z_N label arithmetic, clock/shift algebra, generalized Pauli strings
  tensors    -- single-line / double-line tensor types, fixed points, validators
  paths      -- parametrized tensor families interpolating between fixed points
  geometry   -- brickwork patches and tori; edge/vertex/face bookkeeping
  oracle     -- exact brute-force contraction and parent-Hamiltonian checks
  opcompile  -- Pauli-string -> diagonal vertex-factor compiler
  automaton  -- stochastic brickwork simulation and Monte Carlo estimators
  spectral   -- ring transfer operators, gaps, correlation lengths
  cli        -- reproducible experiment driver
"""

__version__ = "0.1.0"
