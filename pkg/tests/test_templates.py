"""Reaction-template engine: parsing, role swapping, and application.

The core of this module is a table of hand-derived (template, reactants ->
product) vectors: each product structure was worked out on paper from the
template's mapping semantics, and the test demands exact canonical-SMILES
equality with the engine's output.  The expected strings are canonicalized
through the parser at assert time, so the oracle is the hand-derived
structure, not its spelling.
"""
from __future__ import annotations

import pytest

from pgfs.chem import (
    TemplateError,
    apply_template,
    parse_smiles,
    parse_template,
    parse_template_file,
    write_smiles,
)


def canon(smiles: str) -> str:
    return write_smiles(parse_smiles(smiles))


def by_name(templates, name):
    matches = [t for t in templates if t.name == name]
    assert len(matches) == 1, f"template {name!r} not uniquely found"
    return matches[0]


# ---------------------------------------------------------------------------
# hand-derived reaction vectors
# ---------------------------------------------------------------------------

# (template name, reactant SMILES tuple, expected product SMILES)
# Worked by hand from the template semantics: mapped atoms carried over,
# matched-unmapped atoms deleted, hydrogens refilled to the lowest permitted
# valence unless the product pattern pins them.
HAND_VECTORS = [
    # acylations
    ("amide_coupling", ("CC(=O)O", "CN"), "CC(=O)NC"),
    ("amide_coupling_sec", ("CC(=O)O", "CNC"), "CC(=O)N(C)C"),
    ("amide_coupling_R2", ("Nc1ccccc1", "CC(=O)O"), "CC(=O)Nc1ccccc1"),
    ("ester_formation", ("CC(=O)O", "CCO"), "CC(=O)OCC"),
    ("ester_formation", ("OC(=O)c1ccccc1", "OCc1ccccc1"), "O=C(OCc1ccccc1)c1ccccc1"),
    ("sulfonamide", ("CS(=O)(=O)Cl", "CN"), "CS(=O)(=O)NC"),
    ("sulfonamide_sec", ("CS(=O)(=O)Cl", "CNC"), "CS(=O)(=O)N(C)C"),
    ("urea_formation", ("O=C=Nc1ccccc1", "CN"), "CNC(=O)Nc1ccccc1"),
    ("urea_formation_sec", ("O=C=Nc1ccccc1", "CNC"), "CN(C)C(=O)Nc1ccccc1"),
    # alkylations and additions
    ("n_alkylation", ("BrCc1ccccc1", "CN"), "CNCc1ccccc1"),
    ("n_alkylation_sec", ("BrCc1ccccc1", "CNC"), "CN(C)Cc1ccccc1"),
    ("reductive_amination", ("O=Cc1ccccc1", "CN"), "CNCc1ccccc1"),
    ("reductive_amination_ketone", ("CC(C)=O", "CN"), "CNC(C)C"),
    ("epoxide_opening", ("C1CO1", "CN"), "CNCCO"),
    ("michael_addition", ("CC(=O)C=C", "CN"), "CNCCC(C)=O"),
    # aryl couplings
    ("snar_amine", ("Fc1ccccc1", "CN"), "CNc1ccccc1"),
    ("snar_amine_sec", ("Fc1ccccc1", "CNC"), "CN(C)c1ccccc1"),
    ("suzuki_coupling", ("Brc1ccccc1", "OB(O)c1ccccc1"), "c1ccc(-c2ccccc2)cc1"),
    # unimolecular transforms
    ("boc_deprotection", ("CNC(=O)OC(C)(C)C",), "CN"),
    ("nitro_reduction", ("[O-][N+](=O)c1ccccc1",), "Nc1ccccc1"),
    ("methyl_ester_hydrolysis", ("COC(C)=O",), "CC(=O)O"),
]


def test_hand_vector_count():
    assert len(HAND_VECTORS) == 21


@pytest.mark.parametrize(
    "name,reactants,expected",
    HAND_VECTORS,
    ids=[f"{n}-{i}" for i, (n, _, _) in enumerate(HAND_VECTORS)],
)
def test_hand_vector(templates, name, reactants, expected):
    template = by_name(templates, name)
    mols = tuple(parse_smiles(s) for s in reactants)
    products = apply_template(template, mols)
    got = sorted(write_smiles(p) for p in products)
    assert got == [canon(expected)]


def test_application_is_deterministic(templates):
    template = by_name(templates, "amide_coupling")
    mols = (parse_smiles("CC(=O)O"), parse_smiles("CN"))
    first = [write_smiles(p) for p in apply_template(template, mols)]
    second = [write_smiles(p) for p in apply_template(template, mols)]
    assert first == second


# ---------------------------------------------------------------------------
# application edge cases
# ---------------------------------------------------------------------------


def test_no_match_returns_empty(templates):
    template = by_name(templates, "amide_coupling")
    # ethyl acetate has no free carboxylic acid
    products = apply_template(
        template, (parse_smiles("CCOC(C)=O"), parse_smiles("CN"))
    )
    assert products == []


def test_illegal_leaving_group_deletion_rejected(templates):
    # The Boc pattern's unmapped tert-butyl carbons are deleted on
    # application.  With an ethyl in place of one methyl, the matched carbon
    # keeps a bond out of the match, so every combination must be refused.
    template = by_name(templates, "boc_deprotection")
    products = apply_template(template, (parse_smiles("CNC(=O)OC(C)(C)CC"),))
    assert products == []


def test_symmetric_matches_deduplicate(templates):
    # acetone's two methyls give two matches with an identical product
    template = by_name(templates, "reductive_amination_ketone")
    products = apply_template(
        template, (parse_smiles("CC(C)=O"), parse_smiles("CN"))
    )
    assert len(products) == 1


def test_multiple_distinct_products_are_sorted(templates):
    # p-bromoaniline + acid: the swapped amide template leaves the Br ring
    # position untouched; amide forms at the NH2.  Using benzene-1,4-diamine
    # instead gives two equivalent sites -> still one product.  A genuinely
    # ambiguous case: 4-(aminomethyl)aniline has two distinct NH2 groups.
    template = by_name(templates, "amide_coupling")
    products = apply_template(
        template, (parse_smiles("CC(=O)O"), parse_smiles("NCc1ccc(N)cc1"))
    )
    smiles = [write_smiles(p) for p in products]
    assert len(smiles) == 2
    assert smiles == sorted(smiles)
    assert canon("CC(=O)NCc1ccc(N)cc1") in smiles
    assert canon("CC(=O)Nc1ccc(CN)cc1") in smiles


def test_disconnected_product_pattern_splits_molecule():
    # custom cleavage template: ester -> acid + alkane fragment
    template = parse_template(
        "ester_cleavage",
        "[C:1](=[O:2])[O:3][C:4]>>[C:1](=[O:2])[O;H1:3].[C:4]",
    )
    products = apply_template(template, (parse_smiles("CCOC(C)=O"),))
    got = sorted(write_smiles(p) for p in products)
    assert got == sorted([canon("CC(=O)O"), canon("CC")])


def test_wrong_reactant_count_raises(templates):
    template = by_name(templates, "amide_coupling")
    with pytest.raises(TemplateError):
        apply_template(template, (parse_smiles("CC(=O)O"),))


# ---------------------------------------------------------------------------
# template parsing and the swapped twin
# ---------------------------------------------------------------------------


def test_bundled_file_generates_swapped_twins(templates):
    names = [t.name for t in templates]
    assert "amide_coupling" in names
    assert "amide_coupling_R2" in names
    # the twin follows its source immediately
    assert names.index("amide_coupling_R2") == names.index("amide_coupling") + 1
    # unimolecular templates have no twin
    assert "boc_deprotection" in names
    assert "boc_deprotection_R2" not in names


def test_swapped_twin_exchanges_roles(templates):
    twin = by_name(templates, "amide_coupling_R2")
    # roles reversed: amine first, acid second
    products = apply_template(
        twin, (parse_smiles("CN"), parse_smiles("CC(=O)O"))
    )
    assert [write_smiles(p) for p in products] == [canon("CC(=O)NC")]
    # and the original role order no longer matches
    assert apply_template(twin, (parse_smiles("CC(=O)O"), parse_smiles("CN"))) == []


@pytest.mark.parametrize(
    "bad",
    [
        "[C:1][N:2]",  # no >>
        "[C:1].[N:2].[O:3]>>[C:1]",  # three reactants
        ">>[C:1]",  # empty reactant side
        "[C:1]>>",  # empty product side
        "[C:1]>>[C:1][N:2]",  # product map missing on reactant side
        "[C:1].[C:1]>>[C:1]",  # map used twice
        "[C:1][N:2]>>[C:1][N]",  # unmapped product atom
        "[C:1][C:2]>>[C;R1:1][C:2]",  # ring primitive on product atom
    ],
)
def test_malformed_templates_rejected(bad):
    with pytest.raises(TemplateError):
        parse_template("bad", bad)


def test_template_file_rejects_missing_tab():
    with pytest.raises(TemplateError):
        parse_template_file("amide [C:1](=[O:2])[O;H1].[N;H2:3]>>[C:1](=[O:2])[N:3]")


def test_template_file_rejects_duplicate_names():
    line = "t\t[C:1](=[O:2])[O;H1].[N;H2:3]>>[C:1](=[O:2])[N:3]"
    with pytest.raises(TemplateError):
        parse_template_file(f"{line}\n{line}")


def test_template_file_skips_comments_and_blanks():
    text = (
        "# comment\n"
        "\n"
        "hydrolysis\t[C:1](=[O:2])[O;D2:3][C;H3]>>[C:1](=[O:2])[O;H1:3]\n"
    )
    templates = parse_template_file(text)
    assert [t.name for t in templates] == ["hydrolysis"]
