"""Closed-form and quadrature oracles for the time-delay statistics."""
from .densities import (GridFunction, QuadratureError, cdf_from_pdf,
                        cdf_partial, ccdf_partial_point, pdf_partial,
                        pdf_partial_perfect, pdf_partial_point,
                        pdf_partial_unitary_exact, pdf_partial_weak,
                        pdf_proper_unitary_exact, rescale_factor_weak)
from .moments import (DivergentMomentError, cov_partial_perfect,
                      cov_partial_unitary, cov_proper_perfect,
                      relative_variance_wigner, resonance_width_pdf,
                      var_partial_perfect, var_partial_unitary,
                      var_proper_perfect, var_wigner_perfect,
                      var_wigner_unitary)
from .series import PowerSeriesScalar, PrecisionLossError
from .special import (bessel_I0, bessel_K_log_scaled, kummer_U_half,
                      log_gamma, lower_incomplete_gamma)
from .tails import (Cutoffs, LargeDeviationExponents, LeftTailForm,
                    TailCoefficients, cutoffs, large_dev_exponents,
                    left_tail_prefactor_unitary, selberg_cauchy_norm,
                    tail_coefficients, wigner_crossover, z0_closed)

__all__ = [name for name in dir() if not name.startswith("_")]
