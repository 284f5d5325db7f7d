"""Unit conventions and conversions.

Internal unit is the wavenumber k in rad/m; optical lengths are in meters.
Microwave frequencies relate to k through nu = c * k / (2 pi).
"""

import math

# exact by SI definition
C_LIGHT = 299_792_458.0  # m/s


def k_from_ghz(nu_ghz: float) -> float:
    """Wavenumber (rad/m) for a frequency given in GHz."""
    return 2.0 * math.pi * nu_ghz * 1e9 / C_LIGHT


def ghz_from_k(k: float) -> float:
    """Frequency in GHz for a wavenumber given in rad/m."""
    return C_LIGHT * k / (2.0 * math.pi) / 1e9
