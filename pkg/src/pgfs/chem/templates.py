"""Reaction templates: parsing and application.

A template line is ``name<TAB>reactants>>product`` where the reactant side
holds one pattern (unimolecular) or two separated by ``.`` (bimolecular),
and the product side is a single pattern that may contain ``.`` to describe
a bond cleavage into several product molecules.

Application semantics:

- every product-pattern atom must carry an atom map, and each map must
  appear in exactly one reactant pattern;
- mapped reactant atoms are carried into the product and rewritten there
  (element/charge/H-count primitives on the product atom override; hydrogen
  counts are otherwise refilled to the lowest permitted valence);
- matched but unmapped reactant atoms are deleted — a deletion is only
  legal if the atom has no bonds outside the match;
- unmatched reactant atoms and their bonds are carried over unchanged;
- bonds between two product-pattern atoms come exclusively from the
  product pattern (``-``/``=``/``#`` or an implicit single);
- the assembled graph must have exactly as many connected components as
  the product pattern; each component becomes one product molecule.

For a bimolecular template a swapped twin named ``<name>_R2`` is generated
so either reactant role can hold the current molecule.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .build import ValenceError, fill_implicit_h, finalize_molecule
from .molecule import Atom, Bond, Molecule, MoleculeError
from .smarts import PatternError, PatternGraph, find_matches, parse_smarts
from .smiles import write_smiles

MAX_MATCH_COMBINATIONS = 64

_PRODUCT_BOND_ORDER = {None: 1, "-": 1, "=": 2, "#": 3}


class TemplateError(ValueError):
    """Raised for malformed template definitions."""


@dataclass
class ReactionTemplate:
    name: str
    smarts: str  # the source reaction SMARTS (shared with the swapped twin)
    reactants: list[PatternGraph]
    product: PatternGraph
    # map number -> (reactant index, pattern atom index)
    map_sources: dict[int, tuple[int, int]]

    @property
    def is_bimolecular(self) -> bool:
        return len(self.reactants) == 2

    def swapped(self, suffix: str = "_R2") -> "ReactionTemplate":
        if not self.is_bimolecular:
            raise TemplateError("cannot swap a unimolecular template")
        remapped = {
            m: (1 - r, q) for m, (r, q) in self.map_sources.items()
        }
        return ReactionTemplate(
            name=self.name + suffix,
            smarts=self.smarts,
            reactants=[self.reactants[1], self.reactants[0]],
            product=self.product,
            map_sources=remapped,
        )


def parse_template(name: str, smarts: str) -> ReactionTemplate:
    if ">>" not in smarts:
        raise TemplateError(f"template {name!r}: missing '>>'")
    lhs, _, rhs = smarts.partition(">>")
    if not lhs or not rhs:
        raise TemplateError(f"template {name!r}: empty reactant or product side")

    reactant_texts = lhs.split(".")
    if len(reactant_texts) not in (1, 2):
        raise TemplateError(f"template {name!r}: needs one or two reactants")
    try:
        reactants = [parse_smarts(t) for t in reactant_texts]
        product = parse_smarts(rhs, allow_disconnected=True)
    except PatternError as exc:
        raise TemplateError(f"template {name!r}: {exc}") from exc

    for pb in product.bonds:
        if pb.symbol not in _PRODUCT_BOND_ORDER:
            raise TemplateError(
                f"template {name!r}: product bond {pb.symbol!r} not allowed"
            )
    for pa in product.atoms:
        if pa.map_num == 0:
            raise TemplateError(f"template {name!r}: unmapped product atom")
        for test in pa.tests:
            if test[1] or test[0] in ("ring", "degree", "any"):
                raise TemplateError(
                    f"template {name!r}: product atoms may only pin "
                    "element, charge, or H count"
                )

    map_sources: dict[int, tuple[int, int]] = {}
    for r, pat in enumerate(reactants):
        for q, pa in enumerate(pat.atoms):
            if pa.map_num:
                if pa.map_num in map_sources:
                    raise TemplateError(
                        f"template {name!r}: map {pa.map_num} used twice"
                    )
                map_sources[pa.map_num] = (r, q)

    for pa in product.atoms:
        if pa.map_num not in map_sources:
            raise TemplateError(
                f"template {name!r}: product map {pa.map_num} missing on "
                "reactant side"
            )

    return ReactionTemplate(name, smarts, reactants, product, map_sources)


def parse_template_file(text: str) -> list[ReactionTemplate]:
    """Parse a template file and append the swapped twin of each
    bimolecular template directly after it."""
    templates: list[ReactionTemplate] = []
    names = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "\t" not in line:
            raise TemplateError(f"line {lineno}: expected 'name<TAB>smarts'")
        name, _, smarts = line.partition("\t")
        name = name.strip()
        smarts = smarts.strip()
        if not name or not smarts:
            raise TemplateError(f"line {lineno}: empty name or pattern")
        tpl = parse_template(name, smarts)
        for out in (tpl, tpl.swapped()) if tpl.is_bimolecular else (tpl,):
            if out.name in names:
                raise TemplateError(f"duplicate template name {out.name!r}")
            names.add(out.name)
            templates.append(out)
    return templates


def load_templates(path: str) -> list[ReactionTemplate]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_template_file(fh.read())


def _deletion_is_legal(mol: Molecule, image: set[int], deleted: int) -> bool:
    return all(nbr in image for nbr, _ in mol.neighbors[deleted])


def _build_product_graph(
    template: ReactionTemplate,
    mols: tuple[Molecule, ...],
    combo: tuple[tuple[int, ...], ...],
) -> list[Molecule] | None:
    """Assemble product molecules for one match combination, or None if the
    combination is invalid (illegal deletion, valence failure, wrong split)."""
    images = [set(match) for match in combo]

    new_atoms: list[Atom] = []
    src_to_new: dict[tuple[int, int], int] = {}
    h_overrides: list[int | None] = []
    refill: list[bool] = []

    # product-pattern atoms first, in pattern order
    for p_idx, pa in enumerate(template.product.atoms):
        r, q = template.map_sources[pa.map_num]
        src_idx = combo[r][q]
        src = mols[r].atoms[src_idx]
        spec = pa.element_spec()
        element = spec[0] if spec is not None else src.element
        charge = pa.charge_spec()
        if charge is None:
            charge = src.charge
        new_atoms.append(Atom(element, charge, False, 0, False))
        src_to_new[(r, src_idx)] = p_idx
        h_overrides.append(pa.hcount_spec())
        refill.append(True)

    # deleted atoms must not reach outside their match
    for r, mol in enumerate(mols):
        mapped_srcs = {combo[r][q] for rr, q in template.map_sources.values() if rr == r}
        for a_idx in images[r]:
            if a_idx not in mapped_srcs:
                if not _deletion_is_legal(mol, images[r], a_idx):
                    return None

    # unmatched scaffold atoms keep their hydrogen counts
    for r, mol in enumerate(mols):
        for a_idx, atom in enumerate(mol.atoms):
            if a_idx in images[r]:
                continue
            new_atoms.append(Atom(atom.element, atom.charge, False, atom.implicit_h, False))
            src_to_new[(r, a_idx)] = len(new_atoms) - 1
            h_overrides.append(atom.implicit_h)
            refill.append(False)

    new_bonds: list[Bond] = []
    for pb in template.product.bonds:
        order = _PRODUCT_BOND_ORDER[pb.symbol]
        new_bonds.append(Bond(pb.a, pb.b, order, False))

    for r, mol in enumerate(mols):
        mapped_srcs = {combo[r][q] for rr, q in template.map_sources.values() if rr == r}
        for bond in mol.bonds:
            a_matched = bond.a in images[r]
            b_matched = bond.b in images[r]
            if a_matched and b_matched:
                continue  # pattern side is authoritative (or atoms deleted)
            if (a_matched and bond.a not in mapped_srcs) or (
                b_matched and bond.b not in mapped_srcs
            ):
                return None  # bond from a deleted atom into the scaffold
            na = src_to_new[(r, bond.a)]
            nb = src_to_new[(r, bond.b)]
            new_bonds.append(Bond(na, nb, int(bond.order), False))

    # resolve hydrogen counts on rewritten atoms
    explicit = [0] * len(new_atoms)
    for bond in new_bonds:
        explicit[bond.a] += int(bond.order)
        explicit[bond.b] += int(bond.order)
    for idx, atom in enumerate(new_atoms):
        if not refill[idx]:
            atom.implicit_h = h_overrides[idx]
            continue
        if h_overrides[idx] is not None:
            atom.implicit_h = h_overrides[idx]
            continue
        try:
            atom.implicit_h = fill_implicit_h(atom.element, atom.charge, explicit[idx])
        except ValenceError:
            return None

    # split into components and compare against the pattern's component count
    n = len(new_atoms)
    adj: list[list[int]] = [[] for _ in range(n)]
    for bond in new_bonds:
        adj[bond.a].append(bond.b)
        adj[bond.b].append(bond.a)
    comp_of = [-1] * n
    n_comp = 0
    for s in range(n):
        if comp_of[s] != -1:
            continue
        comp_of[s] = n_comp
        queue = [s]
        while queue:
            cur = queue.pop()
            for nbr in adj[cur]:
                if comp_of[nbr] == -1:
                    comp_of[nbr] = n_comp
                    queue.append(nbr)
        n_comp += 1
    if n_comp != len(template.product.components):
        return None

    products: list[Molecule] = []
    for c in range(n_comp):
        atom_ids = [i for i in range(n) if comp_of[i] == c]
        remap = {old: new for new, old in enumerate(atom_ids)}
        atoms_c = [
            Atom(
                new_atoms[i].element,
                new_atoms[i].charge,
                False,
                new_atoms[i].implicit_h,
                False,
            )
            for i in atom_ids
        ]
        bonds_c = [
            Bond(remap[b.a], remap[b.b], int(b.order), False)
            for b in new_bonds
            if comp_of[b.a] == c
        ]
        try:
            products.append(finalize_molecule(atoms_c, bonds_c))
        except (MoleculeError, ValenceError):
            return None
    return products


def apply_template(
    template: ReactionTemplate, mols: tuple[Molecule, ...] | list[Molecule]
) -> list[Molecule]:
    """All distinct product molecules over match combinations (capped at
    MAX_MATCH_COMBINATIONS), sorted by canonical form. Empty if nothing
    applies."""
    mols = tuple(mols)
    if len(mols) != len(template.reactants):
        raise TemplateError(
            f"template {template.name!r} expects {len(template.reactants)} "
            f"reactant(s), got {len(mols)}"
        )
    match_lists = []
    for pat, mol in zip(template.reactants, mols):
        matches = find_matches(pat, mol)
        if not matches:
            return []
        match_lists.append(matches)

    out: dict[str, Molecule] = {}
    for combo in itertools.islice(
        itertools.product(*match_lists), MAX_MATCH_COMBINATIONS
    ):
        products = _build_product_graph(template, mols, combo)
        if products is None:
            continue
        for p in products:
            out.setdefault(write_smiles(p), p)
    return [out[k] for k in sorted(out)]
