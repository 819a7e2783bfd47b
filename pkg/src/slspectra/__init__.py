"""Spectra of -f'' + q f = lambda f on [0, 1]: boundary and periodic spectra, spectral coordinates,
gap-map inversion and the sign-flip involutions they induce."""

__version__ = "0.1.0"

from .potential import Potential, ExtendedPotential, potential_from_fourier, zero_potential, reflect, even_extension, l2_norm
from .fundamental import BOUNDARY_TAGS, IntegratorConfig, fundamental_at_one, discriminant, eigenfunction
from .eigensolve import SpectrumTable, boundary_eigenvalues, periodic_spectrum, spectrum_table
from .spectral_maps import SpectralVector, gap_map, p_map, h_map, pair_map, map_norm, estimate_check
from .inverse import SolverConfig, ReconstructionResult, reconstruct_from_gap_map, eigenvalue_gradient
from .equivalence import SignSequence, ALL_ONES, ODD_ONES, apply_sign_flip, involution, verify_theorem, verify_doubling, assemble_mixed_map
from .oracle import OracleConfig, fd_spectrum

__all__ = [
    "Potential", "ExtendedPotential", "potential_from_fourier", "zero_potential", "reflect", "even_extension", "l2_norm",
    "BOUNDARY_TAGS", "IntegratorConfig", "fundamental_at_one", "discriminant", "eigenfunction",
    "SpectrumTable", "boundary_eigenvalues", "periodic_spectrum", "spectrum_table",
    "SpectralVector", "gap_map", "p_map", "h_map", "pair_map", "map_norm", "estimate_check",
    "SolverConfig", "ReconstructionResult", "reconstruct_from_gap_map", "eigenvalue_gradient",
    "SignSequence", "ALL_ONES", "ODD_ONES", "apply_sign_flip", "involution", "verify_theorem", "verify_doubling", "assemble_mixed_map",
    "OracleConfig", "fd_spectrum",
]
