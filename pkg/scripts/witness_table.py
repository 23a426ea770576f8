"""Print finiteness witnesses for the irreducibles of small groups over Q."""
from covalgebra.algebra.numberfield import rational_field
from covalgebra.groups import (cyclic_group, dihedral_group, finiteness_witness, irreducibles,
                               quaternion_group, symmetric_group, verify_witness)

Q = rational_field()
for G in (cyclic_group(4), cyclic_group(6), symmetric_group(3), dihedral_group(4), quaternion_group()):
    for b in irreducibles(G, Q):
        w = finiteness_witness(b.rep)
        print(f"{G.label:6s} {b.label:6s} dim={b.dim} {w.witness}  ok={verify_witness(b.rep, w.witness)}")
