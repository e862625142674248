"""
Solving a problem file
======================

A problem file holds an interaction unitary and a CR state as JSON with
complex numbers written as [re, im] pairs. This script writes a random one,
reads it back and solves it, then checks the answer against plain channel
iteration.
"""

import tempfile
from pathlib import Path

import numpy as np

from deutschctc import reports
from deutschctc.deutsch import InteractionUnitary
from deutschctc.fixed_point import iterate_channel_fixed_point
from deutschctc.linalg import Tolerances
from deutschctc.randomized import random_pure_state, random_unitary
from deutschctc.scenarios import solve

rng = np.random.default_rng(7)

# Two CR qubits and one CTC qubit: an 8x8 interaction.
u = InteractionUnitary(random_unitary(8, rng), dim_cr=4, dim_ctc=2)
psi = random_pure_state(4, rng)

path = Path(tempfile.mkdtemp()) / "problem.json"
path.write_text(reports.dumps_canonical(reports.problem_dict(u, psi=psi)))

# The loader validates dimensions, unitarity and the state before solving.
data, u2, rho = reports.load_problem(path, Tolerances())
report = solve(u2, rho)
print("largest eigenvalues of M:", np.round(report.spectrum.values[:2], 6))
print("consistency residual:", report.residual)

# Averaging iterates of the channel lands on the same state.
iterated = iterate_channel_fixed_point(u2, rho, np.eye(2) / 2, 2000)
print("max deviation from iteration:", np.abs(iterated.mat - report.selected_ctc.mat).max())

# The same problem from the shell:
#   deutschctc solve problem.json --format json
print(reports.render_text(reports.report_dict(report, "solve", data)))
