"""Exact posterior queries on discrete Bayes nets."""

from ._valelim import (
    BayesNet,
    BudgetExceeded,
    ParseError,
    SearchAborted,
    chain_network,
    disjoint_chains,
    load,
    parse,
    query,
    random_network,
    run_cli,
)

__all__ = [
    "BayesNet",
    "BudgetExceeded",
    "ParseError",
    "SearchAborted",
    "chain_network",
    "disjoint_chains",
    "load",
    "parse",
    "query",
    "random_network",
    "run_cli",
]
