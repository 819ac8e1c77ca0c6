"""Minimal cheminformatics core: molecules, SMILES, patterns, reactions."""

from .build import ValenceError, finalize_molecule
from .molecule import Atom, Bond, BondOrder, Molecule, MoleculeError
from .smarts import PatternError, parse_smarts, find_matches, match_atom
from .io import BlockRecord, CorpusError, CorpusReport, load_building_blocks
from .smiles import SmilesError, parse_smiles, write_smiles
from .templates import (
    ReactionTemplate,
    TemplateError,
    apply_template,
    load_templates,
    parse_template,
    parse_template_file,
)

__all__ = [
    "Atom",
    "Bond",
    "BondOrder",
    "Molecule",
    "MoleculeError",
    "PatternError",
    "ReactionTemplate",
    "BlockRecord",
    "CorpusError",
    "CorpusReport",
    "SmilesError",
    "TemplateError",
    "ValenceError",
    "apply_template",
    "find_matches",
    "finalize_molecule",
    "load_templates",
    "match_atom",
    "parse_smarts",
    "parse_smiles",
    "parse_template",
    "load_building_blocks",
    "parse_template_file",
    "write_smiles",
]
