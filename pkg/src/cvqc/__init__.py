"""Classical verification of quantum computation, simulated end to end.

A classical verifier delegates X/Z measurements of a clock Hamiltonian to a
simulated quantum prover through a commitment protocol built on a toy
trapdoor function family, and accepts or rejects the prover's claimed answer
to a promise problem from the resulting energy estimate.
"""

__version__ = "0.1.0"
