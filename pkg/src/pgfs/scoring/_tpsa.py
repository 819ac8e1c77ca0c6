"""Topological polar surface area via the Ertl group-contribution table.

Nitrogen and oxygen contributions only (the classic table). Each N/O atom
is classified by its bonding signature — hydrogen count, counts of single,
double, triple, and aromatic bonds, charge, and three-membered-ring
membership — and looked up in the published contribution table. Signatures
outside the table fall back to the nearest generic entry for the element.
"""

from __future__ import annotations

from ..chem.molecule import BondOrder, Molecule

# (element, charge, aromatic, h, n_single, n_double, n_triple, n_aromatic,
#  in_3ring) -> Angstrom^2 contribution. Heavy-atom bond counts only;
# implicit hydrogens are carried in `h`.
_CONTRIB: dict[tuple, float] = {
    # nitrogen, neutral, aliphatic
    (7, 0, False, 0, 3, 0, 0, 0, False): 3.24,
    (7, 0, False, 0, 1, 1, 0, 0, False): 12.36,
    (7, 0, False, 0, 0, 0, 1, 0, False): 23.79,
    (7, 0, False, 0, 1, 2, 0, 0, False): 11.68,
    (7, 0, False, 0, 0, 1, 1, 0, False): 13.60,
    (7, 0, False, 0, 3, 0, 0, 0, True): 3.01,
    (7, 0, False, 1, 2, 0, 0, 0, False): 12.03,
    (7, 0, False, 1, 2, 0, 0, 0, True): 21.94,
    (7, 0, False, 1, 0, 1, 0, 0, False): 23.85,
    (7, 0, False, 2, 1, 0, 0, 0, False): 26.02,
    # nitrogen, cationic, aliphatic
    (7, 1, False, 0, 4, 0, 0, 0, False): 0.00,
    (7, 1, False, 0, 2, 1, 0, 0, False): 3.01,
    (7, 1, False, 0, 1, 0, 1, 0, False): 4.36,
    (7, 1, False, 1, 3, 0, 0, 0, False): 4.44,
    (7, 1, False, 1, 1, 1, 0, 0, False): 13.97,
    (7, 1, False, 2, 2, 0, 0, 0, False): 16.61,
    (7, 1, False, 2, 0, 1, 0, 0, False): 25.59,
    (7, 1, False, 3, 1, 0, 0, 0, False): 27.64,
    # nitrogen, aromatic
    (7, 0, True, 0, 0, 0, 0, 2, False): 12.89,
    (7, 0, True, 0, 0, 0, 0, 3, False): 4.41,
    (7, 0, True, 0, 1, 0, 0, 2, False): 4.93,
    (7, 0, True, 0, 0, 1, 0, 2, False): 8.39,
    (7, 0, True, 1, 0, 0, 0, 2, False): 15.79,
    (7, 1, True, 0, 0, 0, 0, 3, False): 4.10,
    (7, 1, True, 0, 1, 0, 0, 2, False): 3.88,
    (7, 1, True, 1, 0, 0, 0, 2, False): 14.14,
    # oxygen
    (8, 0, False, 0, 2, 0, 0, 0, False): 9.23,
    (8, 0, False, 0, 2, 0, 0, 0, True): 12.53,
    (8, 0, False, 0, 0, 1, 0, 0, False): 17.07,
    (8, 0, False, 1, 1, 0, 0, 0, False): 20.23,
    (8, 0, False, 2, 0, 0, 0, 0, False): 20.23,
    (8, -1, False, 0, 1, 0, 0, 0, False): 23.06,
    (8, 0, True, 0, 0, 0, 0, 2, False): 13.14,
}

_GENERIC = {
    # fallbacks when a signature is off-table: one generic polar value per
    # (element, has hydrogen) situation
    (7, False): 3.24,
    (7, True): 12.03,
    (8, False): 9.23,
    (8, True): 20.23,
}


def tpsa(mol: Molecule) -> float:
    cached = mol.cache_get("tpsa")
    if cached is not None:
        return cached
    in_3ring = set()
    for ring in mol.rings:
        if len(ring) == 3:
            in_3ring.update(ring)
    total = 0.0
    for idx, atom in enumerate(mol.atoms):
        if atom.element not in (7, 8):
            continue
        n_single = n_double = n_triple = n_arom = 0
        for _, bidx in mol.neighbors[idx]:
            eff = mol.bonds[bidx].effective_order
            if eff == BondOrder.AROMATIC:
                n_arom += 1
            elif eff == BondOrder.SINGLE:
                n_single += 1
            elif eff == BondOrder.DOUBLE:
                n_double += 1
            else:
                n_triple += 1
        key = (
            atom.element,
            atom.charge,
            atom.aromatic,
            atom.implicit_h,
            n_single,
            n_double,
            n_triple,
            n_arom,
            idx in in_3ring,
        )
        value = _CONTRIB.get(key)
        if value is None:
            value = _GENERIC[(atom.element, atom.implicit_h > 0)]
        total += value
    mol.cache_set("tpsa", total)
    return total
