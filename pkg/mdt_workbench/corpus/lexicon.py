"""
MDT Workbench - Lexicon Loader

Loads lexicon master data from JSON and validates it with the Lexicon model.
"""

from importlib import resources
from pathlib import Path

import orjson

from mdt_workbench.models.corpus import Lexicon

DEFAULT_LEXICON_RESOURCE = "lexicon.json"


def load_lexicon(path: Path | None = None, n_words: int | None = None) -> Lexicon:
    """Load and validate a lexicon.

    Args:
        path: JSON file; the bundled digit-surrogate lexicon when None
        n_words: Keep only the first ``n_words`` words

    Returns:
        Validated lexicon

    Raises:
        FileNotFoundError: If ``path`` doesn't exist
        pydantic.ValidationError: If the data is not a valid lexicon
    """
    if path is None:
        raw = resources.files("mdt_workbench.data").joinpath(DEFAULT_LEXICON_RESOURCE).read_bytes()
    else:
        if not path.exists():
            raise FileNotFoundError(f"File not found: {path}")
        raw = path.read_bytes()

    lexicon = Lexicon.model_validate(orjson.loads(raw))
    if n_words is not None:
        lexicon = lexicon.subset(n_words)
    return lexicon
