"""Follow a chain of BFD-trees from one degree sequence to a larger one in the
majorization order; lambda goes up at every step.

    python demos/majorization_chain.py [SEQ] [SEQ_PRIME]
"""
import sys

from spectree import (Majorization, majorization_chain, majorization_compare,
                      parse_degree_sequence)

a = parse_degree_sequence(sys.argv[1] if len(sys.argv) > 1 else "2^7,1^2")
b = parse_degree_sequence(sys.argv[2] if len(sys.argv) > 2 else "4,3,2^3,1^5")

if majorization_compare(a, b) is not Majorization.LESS:
    sys.exit(f"{a} is not below {b} in the majorization order")

chain = majorization_chain(a, b)
print(f"{a}  ->  {b}: {len(chain)} steps")
print(f"start        lambda = {chain[0][1].lambda_before:.10f}")
for tree, step in chain:
    print(f"{step.kind:12s} lambda = {step.lambda_after:.10f}   now {tree.degree_sequence()}")
