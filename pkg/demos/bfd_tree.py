"""Build a BFD-tree, look at its top Laplacian eigenpair, and compare it with
every other tree of the same degree sequence.

    python demos/bfd_tree.py [SEQUENCE]

The default sequence 3^2,2^3,1^4 has 9 vertices, small enough for brute force.
"""
import sys

import numpy as np

from spectree import (build_bfd_tree, find_extremal_bruteforce, max_laplacian_eigenpair,
                      parse_degree_sequence)

text = sys.argv[1] if len(sys.argv) > 1 else "3^2,2^3,1^4"
pi = parse_degree_sequence(text)
tree = build_bfd_tree(pi)

print(f"sequence {pi}: {pi.n} vertices")
for u, v in tree.edge_list():
    print(f"  {u} -- {v}")

res = max_laplacian_eigenpair(tree)
print(f"\nlambda = {res.lam:.12f}  (residual {res.residual:.1e}, solver {res.solver})")

# the identity order is a BFD-ordering, and |f| is non-increasing along it
mag = np.abs(res.eigenvector)
print("|f| in vertex order:", " ".join(f"{x:.3f}" for x in mag))

rep = find_extremal_bruteforce(pi)
print(f"\n{rep.class_size_unlabeled} non-isomorphic trees in the class")
for lam in sorted(rep.member_lambdas.values(), reverse=True):
    mark = "  <- BFD-tree" if abs(lam - rep.bfd_lambda) < 1e-9 else ""
    print(f"  {lam:.9f}{mark}")
