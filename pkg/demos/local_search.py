"""Walk from an arbitrary tree to the BFD-tree of its class by switching and
shifting edges, printing lambda after every step.

    python demos/local_search.py [N] [SEED]
"""
import sys

import numpy as np

from spectree import (build_bfd_tree, canonical_code, dense_max_eigenvalue, local_search,
                      random_tree)

n = int(sys.argv[1]) if len(sys.argv) > 1 else 14
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 3
start = random_tree(n, np.random.default_rng(seed))

print(f"random tree on {n} vertices, degrees {start.degree_sequence()}")
print(f"start  lambda = {dense_max_eigenvalue(start):.10f}")
end, steps = local_search(start)
for i, s in enumerate(steps, 1):
    print(f"step {i:2d} {s.kind:6s} -{list(s.removed)} +{list(s.added)}  "
          f"lambda = {s.lambda_after:.10f}")

target = build_bfd_tree(start.degree_sequence())
print(f"\nreached the BFD-tree: {canonical_code(end) == canonical_code(target)}")
