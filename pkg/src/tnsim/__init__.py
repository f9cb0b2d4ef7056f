"""Tensor-network simulations: MPS/MPO, DMRG, TDVP and an exact-diagonalization oracle."""

__version__ = "0.1.0"
