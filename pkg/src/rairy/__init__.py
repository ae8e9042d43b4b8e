"""The r-Airy kernel for Hermitian random matrices with a small-rank
external source: generalized Airy functions, the limiting edge kernel and
its Fredholm determinants, equilibrium data, a spiked-GUE sampler and an
exact finite-n kernel oracle."""
__version__ = "0.1.0"

from .genairy import gen_airy, GenAirySpec, eta, airy_matrix
from .kernel import KernelParams, r_airy_kernel, airy_kernel_classical, kernel_matrix
from .fredholm import GapSpec, gap_probability, fr_cdf_grid
from .equilibrium import Potential, solve_one_cut, classify_regime

__all__ = ["gen_airy", "GenAirySpec", "eta", "airy_matrix", "KernelParams",
           "r_airy_kernel", "airy_kernel_classical", "kernel_matrix", "GapSpec",
           "gap_probability", "fr_cdf_grid", "Potential", "solve_one_cut",
           "classify_regime"]
