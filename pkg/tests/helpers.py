import numpy as np

from deutschctc.deutsch import InteractionUnitary
from deutschctc.randomized import random_density_matrix, random_pure_state, random_unitary


def random_instance(rng, dcr=2, dctc=2):
    u = InteractionUnitary(random_unitary(dcr * dctc, rng), dcr, dctc)
    return u, random_pure_state(dcr, rng), random_density_matrix(dctc, rng)


def random_instances(count=100, seed=12345):
    """Seeded (u, psi, sigma) triples, alternating 4x4 and 8x8 unitaries."""
    rng = np.random.default_rng(seed)
    return [random_instance(rng, 2 if k % 2 == 0 else 4) for k in range(count)]
