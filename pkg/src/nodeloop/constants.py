"""Physical constants (2019 SI exact values)."""

PLANCK = 6.62607015e-34  # [J s]
ELEMENTARY_CHARGE = 1.602176634e-19  # [C]

COOPER_PAIR_CHARGE = 2.0 * ELEMENTARY_CHARGE  # [C]
FLUX_QUANTUM = PLANCK / COOPER_PAIR_CHARGE  # [Wb]
