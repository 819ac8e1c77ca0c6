"""Reward functions and scorer plumbing.

Re-exports are resolved lazily (PEP 562): the descriptor module depends on
the Crippen and TPSA submodules while QED and the SA score depend on the
descriptor module, so importing everything eagerly here would create a cycle.

The ``_qed`` and ``_tpsa`` modules carry a leading underscore because their
main callable shares their name: if the module were ``qed.py``, any
``from pgfs.scoring.qed import ...`` elsewhere would rebind the package
attribute ``qed`` to the module object, shadowing the function for every
later ``from pgfs.scoring import qed``.
"""

_EXPORTS = {
    "ADModel": "ad",
    "ad_distance": "ad",
    "ad_inside": "ad",
    "fit_ad_model": "ad",
    "CrippenTable": "crippen",
    "DataFileError": "crippen",
    "crippen_logp": "crippen",
    "crippen_mr": "crippen",
    "load_crippen_table": "crippen",
    "ExternalScorer": "external",
    "ExternalScorerError": "external",
    "penalized_clogp": "plogp",
    "ring_penalty": "plogp",
    "QEDParams": "_qed",
    "ads": "_qed",
    "alert_count": "_qed",
    "default_alerts": "_qed",
    "default_params": "_qed",
    "load_qed_params": "_qed",
    "qed": "_qed",
    "qed_properties": "_qed",
    "FragmentTable": "sa",
    "build_sa_table": "sa",
    "sa_score": "sa",
    "tpsa": "_tpsa",
    "Scorer": "registry",
    "make_scorer": "registry",
}

__all__ = sorted(_EXPORTS)


def __getattr__(name: str):
    module_name = _EXPORTS.get(name)
    if module_name is None:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    import importlib

    module = importlib.import_module(f".{module_name}", __name__)
    value = getattr(module, name)
    globals()[name] = value
    return value


def __dir__():
    return sorted(set(globals()) | set(__all__))
