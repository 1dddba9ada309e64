"""Executable checks for parabolic Higgs bundles of Fuchsian type on punctured surfaces.

Submodules
----------
picard       line bundles ``L^p ⊗ ξ^q``, degrees, Riemann-Roch counts
parabolic    the parabolic bundles ``E`` and ``W_k``
higgs        companion Higgs fields, residues, stability, Hitchin map
repdim       dimension counts for the Teichmüller component
metricsolve  radial self-duality solver and the metrics ``h_a``
cli          the ``higgsteich`` command
"""

__version__ = "0.1.0"
