"""Synthesis environment: index construction, masks, k-NN, episodes, CSVs."""
from __future__ import annotations

import numpy as np
import pytest

from pgfs.chem import load_building_blocks, parse_template_file
from pgfs.env import (
    EPISODE_CSV_HEADER,
    QUANTILE_CSV_HEADER,
    EnvConfigError,
    EpisodeRecord,
    StepRecord,
    SynthesisEnv,
    build_index,
    episode_csv_rows,
    knn,
    random_search,
    write_episode_csv,
    write_quantile_csv,
    write_routes,
)

MINI_TEMPLATES = (
    "amide_coupling\t[C:1](=[O:2])[O;H1].[N;H2:3]>>[C:1](=[O:2])[N:3]\n"
    "methyl_ester_hydrolysis\t[C:1](=[O:2])[O;D2:3][C;H3]>>[C:1](=[O:2])[O;H1:3]\n"
)

MINI_BLOCKS = (
    "CC(=O)O\tacid_acetic\n"
    "OC(=O)c1ccccc1\tacid_benzoic\n"
    "CCC(=O)O\tacid_propionic\n"
    "CN\tamine_methyl\n"
    "CCN\tamine_ethyl\n"
    "NCc1ccccc1\tamine_benzyl\n"
    "COC(C)=O\tester_methyl_acetate\n"
    "CCO\tinert_ethanol\n"  # admits no template in either role
)


def block_named(index, identifier: str) -> int:
    return next(
        i for i, rec in enumerate(index.blocks) if rec.identifier == identifier
    )


def atom_count_scorer(mols):
    """Deterministic, transparent reward: heavy-atom count."""
    return np.array([float(len(m)) for m in mols])


@pytest.fixture()
def mini_index(tmp_path):
    blocks_path = tmp_path / "blocks.smi"
    blocks_path.write_text(MINI_BLOCKS)
    records, _ = load_building_blocks(str(blocks_path))
    templates = parse_template_file(MINI_TEMPLATES)
    return build_index(records, templates, min_compat=2)


# ---------------------------------------------------------------------------
# index construction
# ---------------------------------------------------------------------------


def test_compat_lists(mini_index):
    names = [t.name for t in mini_index.templates]
    assert names == ["amide_coupling", "amide_coupling_R2", "methyl_ester_hydrolysis"]
    ids = {i: rec.identifier for i, rec in enumerate(mini_index.blocks)}

    amide = mini_index.compat[names.index("amide_coupling")]
    assert [ids[i] for i in amide] == ["amine_methyl", "amine_ethyl", "amine_benzyl"]

    swapped = mini_index.compat[names.index("amide_coupling_R2")]
    assert [ids[i] for i in swapped] == [
        "acid_acetic",
        "acid_benzoic",
        "acid_propionic",
    ]

    assert mini_index.compat[names.index("methyl_ester_hydrolysis")] is None


def test_starved_template_dropped(tmp_path):
    blocks_path = tmp_path / "blocks.smi"
    # only one amine partner available
    blocks_path.write_text("CC(=O)O\tacid\nCN\tamine\n")
    records, _ = load_building_blocks(str(blocks_path))
    templates = parse_template_file(MINI_TEMPLATES)
    index = build_index(records, templates, min_compat=2)
    names = [t.name for t in index.templates]
    assert "amide_coupling" not in names
    assert "methyl_ester_hydrolysis" in names  # unimolecular never dropped
    assert any("amide_coupling" == name for name, _ in index.dropped)


def test_all_templates_dropped_is_fatal(tmp_path):
    blocks_path = tmp_path / "blocks.smi"
    blocks_path.write_text("CC(=O)O\tacid\nCN\tamine\n")
    records, _ = load_building_blocks(str(blocks_path))
    templates = parse_template_file(
        "amide_coupling\t[C:1](=[O:2])[O;H1].[N;H2:3]>>[C:1](=[O:2])[N:3]\n"
    )
    with pytest.raises(EnvConfigError):
        build_index(records, templates, min_compat=5)


def test_empty_corpus_is_fatal(templates):
    with pytest.raises(EnvConfigError):
        build_index([], templates)


def test_unique_match_rule(mini_index):
    from pgfs.chem import parse_smiles

    names = [t.name for t in mini_index.templates]
    amide = names.index("amide_coupling")
    # one acid group: applicable
    assert mini_index.template_mask(parse_smiles("CC(=O)O"))[amide]
    # two acid groups: pattern matches twice -> masked out
    assert not mini_index.template_mask(parse_smiles("OC(=O)CC(=O)O"))[amide]
    # no acid group: masked out
    assert not mini_index.template_mask(parse_smiles("CCO"))[amide]


def test_start_indices_admit_some_template(mini_index):
    for i in mini_index.start_indices:
        assert mini_index.template_mask(mini_index.blocks[i].mol).any()


def test_registry_hash_sensitivity(tmp_path, mini_index):
    blocks_path = tmp_path / "blocks.smi"
    blocks_path.write_text(MINI_BLOCKS + "NCCO\tamine_extra\n")
    records, _ = load_building_blocks(str(blocks_path))
    other = build_index(records, parse_template_file(MINI_TEMPLATES), min_compat=2)
    assert other.registry_hash() != mini_index.registry_hash()
    assert len(mini_index.registry_hash()) == 64


def test_features_are_normalized(mini_index):
    assert mini_index.features.shape == (len(mini_index.blocks), 16)
    assert np.all(mini_index.features >= -1.0)
    assert np.all(mini_index.features <= 1.0)


# ---------------------------------------------------------------------------
# k-NN resolution
# ---------------------------------------------------------------------------


def test_knn_against_linear_scan(index):
    rng = np.random.default_rng(42)
    bimolecular = [
        t_idx for t_idx, c in enumerate(index.compat) if c is not None
    ]
    for _ in range(50):
        t_idx = int(rng.choice(bimolecular))
        query = rng.uniform(-1, 1, size=index.features.shape[1])
        compat = index.compat[t_idx]
        dists = np.linalg.norm(index.features[list(compat)] - query, axis=1)
        for k in (1, 3, 5):
            expected = [
                compat[i] for i in np.argsort(dists, kind="stable")[:k]
            ]
            assert knn(index, t_idx, query, k) == expected


def test_knn_ties_break_by_block_index(mini_index):
    names = [t.name for t in mini_index.templates]
    t_idx = names.index("amide_coupling")
    compat = mini_index.compat[t_idx]
    # query exactly between the first two compatible rows
    a = mini_index.features[compat[0]]
    b = mini_index.features[compat[1]]
    mid = (a + b) / 2
    got = knn(mini_index, t_idx, mid, 2)
    assert got == sorted(got)


def test_knn_k_larger_than_pool(mini_index):
    t_idx = [t.name for t in mini_index.templates].index("amide_coupling")
    got = knn(mini_index, t_idx, np.zeros(16), 99)
    assert sorted(got) == list(mini_index.compat[t_idx])


def test_knn_rejects_bad_arguments(mini_index):
    names = [t.name for t in mini_index.templates]
    uni = names.index("methyl_ester_hydrolysis")
    bi = names.index("amide_coupling")
    with pytest.raises(EnvConfigError):
        knn(mini_index, uni, np.zeros(16), 1)
    with pytest.raises(EnvConfigError):
        knn(mini_index, bi, np.zeros(16), 0)


# ---------------------------------------------------------------------------
# environment mechanics
# ---------------------------------------------------------------------------


def test_env_dimensions(mini_index):
    env = SynthesisEnv(mini_index, atom_count_scorer, seed=0)
    assert env.state_dim == 1024
    assert env.action_dim == 16
    assert env.n_templates == 3
    assert env.state_features(mini_index.blocks[0].mol).shape == (1024,)


def test_step_before_reset_raises(mini_index):
    env = SynthesisEnv(mini_index, atom_count_scorer, seed=0)
    with pytest.raises(EnvConfigError):
        env.step(0, np.zeros(16))


def test_reset_with_fixed_start(mini_index):
    env = SynthesisEnv(mini_index, atom_count_scorer, seed=0)
    env.reset(start=0)
    assert env.state_smiles == mini_index.blocks[0].smiles


def test_reset_rejects_maskless_start(mini_index):
    # ethanol admits nothing: not an acid, ester, or amine
    env = SynthesisEnv(mini_index, atom_count_scorer, seed=0)
    with pytest.raises(EnvConfigError):
        env.reset(start=block_named(mini_index, "inert_ethanol"))


def test_masked_template_rejected(mini_index):
    env = SynthesisEnv(mini_index, atom_count_scorer, seed=0)
    env.reset(start=0)  # acetic acid
    names = [t.name for t in mini_index.templates]
    with pytest.raises(EnvConfigError):
        env.step(names.index("methyl_ester_hydrolysis"), None)
    with pytest.raises(EnvConfigError):
        env.step(99, None)


def test_bimolecular_needs_action_vector(mini_index):
    env = SynthesisEnv(mini_index, atom_count_scorer, seed=0)
    env.reset(start=0)
    with pytest.raises(EnvConfigError):
        env.step(0, None)


def test_step_executes_amide_coupling(mini_index):
    env = SynthesisEnv(mini_index, atom_count_scorer, seed=0, k=1)
    env.reset(start=0)  # acetic acid
    names = [t.name for t in mini_index.templates]
    t_idx = names.index("amide_coupling")
    # aim the action at the methylamine feature row
    amine_idx = next(
        i
        for i, rec in enumerate(mini_index.blocks)
        if rec.identifier == "amine_methyl"
    )
    a = mini_index.features[amine_idx]
    product, reward, done, record = env.step(t_idx, a)
    assert record.r1 == "CC(=O)O"
    assert record.r2 == mini_index.blocks[amine_idx].smiles
    assert record.template == "amide_coupling"
    assert reward == float(len(product))
    assert record.product == env.state_smiles
    assert np.array_equal(env.last_executed_a, a)


def test_k_candidates_keep_argmax_reward(mini_index):
    # with k covering the whole amine pool, the scorer (heavy-atom count)
    # must pick the largest product: the benzylamine coupling
    env = SynthesisEnv(mini_index, atom_count_scorer, seed=0, k=10)
    env.reset(start=0)
    names = [t.name for t in mini_index.templates]
    product, reward, _, record = env.step(names.index("amide_coupling"), np.zeros(16))
    assert record.r2 == "NCc1ccccc1"
    assert reward == float(len(product))


def test_unimolecular_step_ignores_action(mini_index):
    env = SynthesisEnv(mini_index, atom_count_scorer, seed=0)
    ester = next(
        i
        for i, rec in enumerate(mini_index.blocks)
        if rec.identifier == "ester_methyl_acetate"
    )
    env.reset(start=ester)
    names = [t.name for t in mini_index.templates]
    product, reward, done, record = env.step(
        names.index("methyl_ester_hydrolysis"), None
    )
    assert record.r2 == ""
    assert record.product == "C(C)(=O)O" or record.product == env.state_smiles
    assert env.last_executed_a is None
    # acetic acid still admits the amide coupling, so the episode continues
    assert not done


def test_horizon_termination(mini_index):
    env = SynthesisEnv(mini_index, atom_count_scorer, seed=0, max_steps=1)
    env.reset(start=0)
    _, _, done, record = env.step(0, mini_index.features[3])
    assert done
    assert record.reason == "horizon"


def test_dead_end_termination(tmp_path):
    # a corpus where the amide product admits no further template
    blocks_path = tmp_path / "blocks.smi"
    blocks_path.write_text("CC(=O)O\tacid\nCN\tamine1\nCCN\tamine2\n")
    records, _ = load_building_blocks(str(blocks_path))
    templates = parse_template_file(
        "amide_coupling\t[C:1](=[O:2])[O;H1].[N;H2:3]>>[C:1](=[O:2])[N:3]\n"
    )
    index = build_index(records, templates, min_compat=2)
    env = SynthesisEnv(index, atom_count_scorer, seed=0, max_steps=5)
    env.reset(start=0)
    _, _, done, record = env.step(0, index.features[1])
    assert done
    assert record.reason == "no_templates"


def test_env_seed_reproducibility(mini_index):
    def run(seed):
        env = SynthesisEnv(mini_index, atom_count_scorer, seed=seed)
        out = []
        for _ in range(4):
            env.reset()
            out.append(env.state_smiles)
        return out

    assert run(7) == run(7)
    assert run(7) != run(8)


# ---------------------------------------------------------------------------
# random-search baseline
# ---------------------------------------------------------------------------


def test_random_search_budget_exact(mini_index):
    rng = np.random.default_rng(0)
    episodes = random_search(mini_index, atom_count_scorer, 40, rng, max_steps=3)
    assert sum(ep.reactions for ep in episodes) == 40
    assert all(ep.steps for ep in episodes)


def test_random_search_respects_starts(mini_index):
    rng = np.random.default_rng(0)
    starts = [0, 1]
    episodes = random_search(
        mini_index, atom_count_scorer, 12, rng, max_steps=2, starts=starts
    )
    expected = [mini_index.blocks[starts[i % 2]].smiles for i in range(len(episodes))]
    assert [ep.start for ep in episodes] == expected


def test_random_search_reproducible(mini_index):
    def run():
        rng = np.random.default_rng(123)
        eps = random_search(mini_index, atom_count_scorer, 30, rng, max_steps=3)
        return [(ep.start, ep.final_product, ep.max_reward) for ep in eps]

    assert run() == run()


# ---------------------------------------------------------------------------
# episode records and serialization
# ---------------------------------------------------------------------------


def make_episode() -> EpisodeRecord:
    return EpisodeRecord(
        start="CC(=O)O",
        steps=[
            StepRecord("CC(=O)O", "amide_coupling", "CN", "CC(=O)NC", 0.5, False, ""),
            StepRecord("CC(=O)NC", "weird,name", "", "", -1.0, True, "apply_failed"),
        ],
    )


def test_episode_record_properties():
    ep = make_episode()
    assert ep.max_reward == 0.5
    assert ep.final_product == "CC(=O)NC"  # last non-empty product
    assert ep.reactions == 2
    assert EpisodeRecord(start="CCO", steps=[]).final_product == "CCO"


def test_episode_csv_rows_quote_commas():
    rows = episode_csv_rows(3, make_episode())
    assert rows[0].startswith("3,1,CC(=O)O,amide_coupling,CN,CC(=O)NC,0.5,0,")
    assert '"weird,name"' in rows[1]


def test_write_episode_csv(tmp_path):
    path = tmp_path / "episodes.csv"
    write_episode_csv([make_episode()], str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == EPISODE_CSV_HEADER
    assert len(lines) == 3


def test_write_quantile_csv(tmp_path):
    path = tmp_path / "quantiles.csv"
    eps = [make_episode(), make_episode()]
    write_quantile_csv(eps, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == QUANTILE_CSV_HEADER
    # two step positions, each aggregated over two episodes
    assert len(lines) == 3
    step1 = lines[1].split(",")
    assert step1[0] == "1" and step1[1] == "2"
    # all quantiles of a constant sample equal that constant
    assert all(float(x) == 0.5 for x in step1[2:])


def test_write_routes_readable(tmp_path):
    path = tmp_path / "routes.txt"
    write_routes([make_episode()], str(path))
    text = path.read_text()
    assert "episode 0 (max reward 0.500000)" in text
    assert "start: CC(=O)O" in text
    assert "amide_coupling + CN -> CC(=O)NC" in text
    assert "(application failed)" in text
    assert "terminal: apply_failed" in text
