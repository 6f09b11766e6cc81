"""Class-association-rule text classification over dependency-parsed corpora.

The pipeline is: parse a corpus (``corpus``), prune each sentence to a small
itemset (``pruning``), optionally replace items by WordNet hyperonyms
(``wordnet``), mine class association rules (``mining``), classify documents
by confidence-sum aggregation (``classifier``) and cross-validate with a
threshold search tuned to a rule budget (``evaluation``). ``cli`` exposes it
as a command-line tool and ``mcp_server`` as an MCP server.
"""

__version__ = "0.1.0"
