"""Saturation, entailment and resolution on the theory of strict partial orders.

Run with ``python demos/partial_orders.py``.
"""

from hornlab.chase import entails_horn, saturate
from hornlab.parse import parse_structure, parse_theory, print_structure
from hornlab.sld import format_deduction, sld_deduce, verify_deduction

po = parse_theory("signature { lt/2 } clause lt(x,y), lt(y,z) -> lt(x,z); clause lt(x,x) -> false;")
chain = parse_structure("domain { a, b, c, d } lt(a,b); lt(b,c); lt(c,d);", po.signature)

r = saturate(chain, po)
print("closure of a 4-chain:")
print(print_structure(r.structure), end="")
print("trace:")
print(r.trace_text(), end="")

# a cycle saturates to a loop, which the irreflexivity clause rejects
cycle = parse_structure("domain { a, b } lt(a,b); lt(b,a);", po.signature)
bad = saturate(cycle, po)
print("\ncycle consistent:", bad.consistent, "| last step:", bad.bottom)

# the same fact seen twice: semantically by the chase, syntactically by SLD
psi = parse_theory("clause lt(x,y), lt(y,z), lt(z,w) -> lt(x,w);", po.signature).clauses[0]
print("\nchase says entailed:", entails_horn(po, psi).entailed)
proof = sld_deduce(po, psi)
print(format_deduction(proof.deduction), end="")
print("certificate verifies:", verify_deduction(po, psi, proof.deduction))

sym = parse_theory("clause lt(x,y) -> lt(y,x);", po.signature).clauses[0]
print("\nsymmetry entailed:", entails_horn(po, sym).entailed, "| SLD:", sld_deduce(po, sym, max_depth=6))
