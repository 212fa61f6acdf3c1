"""Pressure, free energy and multifractal spectra of conformal iterated function systems."""

from .enclosure import Enclosure
from .exhaust import (ConvergenceReport, exhaust_run, lambda_ratio_check, regular_certificate_exhausting,
                      rho_distance)
from .free_energy import FreeEnergyCurve, FreeEnergyPoint, free_energy_at, free_energy_curve, slopes
from .legendre import biconjugate_gap, conjugate, spectrum
from .potential import (PotentialSpec, WeightedPotential, constant, explicit, geometric, neg_identity,
                        neg_two_log)
from .pressure import (DepthPolicy, PressureValue, Sign, exact_series_pressure, partition_bounds, pressure,
                       pressure_sign)
from .system import (SystemSpec, finite, gauss, generalized_lueroth, log_power, lueroth, perturbed_gauss,
                     power_law, truncate)

__all__ = [
    "Enclosure", "ConvergenceReport", "exhaust_run", "lambda_ratio_check",
    "regular_certificate_exhausting", "rho_distance", "FreeEnergyCurve", "FreeEnergyPoint",
    "free_energy_at", "free_energy_curve", "slopes", "biconjugate_gap", "conjugate", "spectrum",
    "PotentialSpec", "WeightedPotential", "constant", "explicit", "geometric", "neg_identity",
    "neg_two_log", "DepthPolicy", "PressureValue", "Sign", "exact_series_pressure",
    "partition_bounds", "pressure", "pressure_sign", "SystemSpec", "finite", "gauss",
    "generalized_lueroth", "log_power", "lueroth", "perturbed_gauss", "power_law", "truncate",
]
