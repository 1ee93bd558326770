"""Frozen reference values, computed before the implementation.

Each value was produced outside the package: mpmath at 25-30 digits (sums,
quadrature, and closed forms built from mpmath's own sine integral) or exact
rational arithmetic.  Nothing here imports flowcube.
"""

from fractions import Fraction

# phi_1(1/2) = 4/pi^2
FEJER_HALF = 0.40528473456935108578

# Mass of phi_1 outside [-100, 100] and of phi_4 outside [-100, 100].
TAIL_MASS_1_100 = 0.00101320670358826
TAIL_MASS_4_100 = 0.00025330287890301
# Trapezoid masses over [-100, 100]: 1 minus the discarded grid tail, summed
# exactly with Hurwitz zeta values (sin^2 is periodic on the grid).
TRAP_MASS_1_100_001 = 0.998986793296412
TRAP_MASS_4_100_0005 = 0.9997466971210971

# int phi_n(y) cos(2 pi beta y) dy by quadrature over [0, 50] plus a
# closed-form tail; equals tent(beta, n).
MULTIPLIERS = {
    (0.5, 1): 0.5,
    (0.25, 1): 0.75,
    (1.5, 2): 0.25,
    (1.0, 1): 0.0,
    (0.3, 8): 0.9625,
    (0.3, 1): 0.7,
    (1.5, 1): 0.0,
}

# sup_x | |sin(pi x)| * phi_64 - |sin(pi x)| |, attained at the integers:
# (4/pi) sum_k min(1, k/n) / (4k^2 - 1), tail beyond n summed in closed form.
ABS_SINE_ERROR_64 = 0.030450335807762532
ABS_SINE_ERROR = {
    4: 0.2667739998492722,
    8: 0.16088976553740805,
    16: 0.09422492665129736,
    32: 0.05400611260990457,
    64: ABS_SINE_ERROR_64,
}


def bebutov_constants(K: int) -> Fraction:
    """Brute-force sum_{N=1..K} 2^(-1-N) for f = 0, g = 1 with m = 1."""
    return sum((Fraction(1, 2 ** (1 + N)) for N in range(1, K + 1)), Fraction(0))


def bernstein_constants(K: int) -> Fraction:
    """sum_{n=1..K} 2 / 2^n for f = 1, g = -1."""
    return sum((Fraction(2, 2**n) for n in range(1, K + 1)), Fraction(0))
