"""Which universal sentences are equivalent to Horn ones?

A sentence is Horn-definable exactly when its models are closed under binary
products.  This walks through both verdicts and the quantified-SAT gadget.
"""

from hornlab.convexity import EaSatInstance, check_convex, encode_easat, format_verdict, to_horn
from hornlab.parse import parse_theory, print_structure, print_theory

pq = parse_theory("signature { P/1; Q/1 } clause -> P(x) | Q(x);")
v = check_convex(pq)
print(format_verdict(v), end="")
print("the product point:")
print(print_structure(v.product()), end="")

# with Q ruled out the disjunction collapses to a Horn clause
pq_no_q = parse_theory("signature { P/1; Q/1 } clause -> P(x) | Q(x); clause Q(x) -> false;")
print("\nrewrite:")
print(print_theory(to_horn(pq_no_q)), end="")

# exists X1 forall X2 . (X1 or X2) and (X1 or not X2): true with X1 = 1
inst = EaSatInstance(1, 2, [(1, 2), (1, -2)])
sentence = encode_easat(inst)
print("\nencoded instance:")
print(print_theory(sentence), end="")
print("instance true:", inst.is_true(), "| encoding Horn-definable:", check_convex(sentence).convex)

# exists X1 forall X2 . (X1 and X2): false, so the encoding is Horn-definable
inst = EaSatInstance(1, 2, [(1,), (2,)])
print("instance true:", inst.is_true(), "| encoding Horn-definable:", check_convex(encode_easat(inst)).convex)
