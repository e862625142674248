"""
Nearby inputs, distant solutions
================================

Three CR inputs that approach one another as epsilon shrinks give
superoperators M^A, M^B and M^C that also converge. Their selected CTC
solutions do not: A always picks I/2 and C always picks |0><0|, so the
trace distance between them stays at 1/2.
"""

import numpy as np

from deutschctc import sweep_epsilon
from deutschctc.scenarios import dejonghe_M, run_dejonghe
from deutschctc.fixed_point import SelectionRule

epsilons = [0.5, 0.1, 0.01, 0.001, 1e-5]
result = sweep_epsilon(epsilons)

# Column by column: the second eigenvalues of A and C creep up to 1, and
# M^A approaches M^B, while the trace distance of the solutions does not move.
print(f"{'eps':>8} {'lambda2_A':>10} {'lambda2_C':>10} {'|M_A-M_B|':>10} {'T(A,C)':>8}")
for row in result.rows:
    print(f"{row.epsilon:8.0e} {row.lambda2_a:10.6f} {row.lambda2_c:10.6f} "
          f"{row.m_distance_ab:10.2e} {row.trace_distance_ac:8.4f}")

# At the limit itself M^A equals M^B, which has a whole segment of solutions
# diag(beta, 1 - beta). The rule decides which one is reported.
print("M^A(0) == M^B:", np.array_equal(dejonghe_M("A", 0.0).m, dejonghe_M("B").m))
for beta in (0.0, 0.5, 1.0):
    rho = run_dejonghe("B", 0.1, SelectionRule.given(beta)).selected_ctc
    print(f"param={beta}: diag =", np.round(np.diag(rho.mat).real, 10))
