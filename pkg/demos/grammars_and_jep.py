"""From a context-free grammar to a Horn theory, and joint embedding failures.

The compiled theory has the joint embedding property exactly when the grammar
generates every non-empty word.  For {a^n b^n} the word "a" is missing, and
it shows up as a witness.
"""

from hornlab.cfg import compile_grammar, member, normalize_self_rules, word_witness, words
from hornlab.jep import all_connected, format_witness, jep_refute, verify_witness
from hornlab.parse import parse_grammar, print_theory

anbn = normalize_self_rules(parse_grammar("start S; terminals a, b; S -> a S b; S -> a b;"))
compiled = compile_grammar(anbn)
print(print_theory(compiled.phi), end="")
print("first part connected:", all_connected(compiled.phi1), "| whole:", all_connected(compiled.phi))

r = jep_refute(compiled.phi)
print("\nsmallest witness found:")
print(format_witness(compiled.phi, r.witness), end="")

print("\nwords up to length 3:")
for w in words(anbn.terminals, 3):
    inside = member(anbn, w)
    ok = verify_witness(compiled.phi, word_witness(anbn, w))
    print(f"  {''.join(w):4} in L: {inside!s:5}  word witness valid: {ok}")

aplus = normalize_self_rules(parse_grammar("start S; terminals a; S -> a S; S -> a;"))
print("\na+ within default bounds:", jep_refute(compile_grammar(aplus).phi))
