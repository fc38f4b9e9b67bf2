"""Linear-optical interferometry toolkit: unitary realization by iterated
cosine-sine decomposition, interferometer characterization from one- and
two-photon counts, and SU(n)/S_n simulation machinery (canonical basis
states, D-functions, immanants)."""

__version__ = "0.1.0"
