"""
MDT Workbench - Configuration Management

Loads experiment configuration from sectioned ``key = value`` files and
process-level settings from the environment (and an optional .env file).
"""

import configparser
from pathlib import Path
from typing import Any

from pydantic_settings import BaseSettings, SettingsConfigDict

from mdt_workbench.layer.errors import ConfigError
from mdt_workbench.models.corpus import CorpusConfig
from mdt_workbench.models.estimator import HarmonicConfig, SvmTrainConfig
from mdt_workbench.models.experiment import ExperimentConfig

SECTIONS = ("corpus", "frontend", "hmm", "svm", "mask", "experiment")
# [frontend] keys that belong to the delta window model
_DELTA_KEYS = {"window_half_width"}
# [corpus] key naming a flat corpus file whose values are overridden inline
_CORPUS_INCLUDE_KEY = "config"

BUNDLED_CONFIG = Path(__file__).resolve().parent.parent / "configs" / "desk.cfg"


class RuntimeSettings(BaseSettings):
    """Process-level settings.

    Read from ``MDT_*`` environment variables; a ``.env`` file in the
    working directory is honoured as well.
    """

    model_config = SettingsConfigDict(
        env_prefix="MDT_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )

    log_level: str = "INFO"
    workers: int | None = None


def _read_parser(path: Path, flat: bool = False) -> configparser.ConfigParser:
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    text = path.read_text(encoding="utf-8")
    if flat:
        text = "[corpus]\n" + text
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as e:
        raise ConfigError(f"{path}: {e}") from e
    return parser


def load_corpus_config(path: Path) -> CorpusConfig:
    """Read a flat ``key = value`` corpus file.

    Raises:
        ConfigError: Missing or unparsable file
        pydantic.ValidationError: Unknown key or invalid value
    """
    parser = _read_parser(path, flat=True)
    return CorpusConfig.model_validate(dict(parser["corpus"]))


def _svm_section(values: dict[str, str]) -> dict[str, Any]:
    """Route [svm] keys to the trainer, the harmonic tracker or the feature settings."""
    svm_keys = set(SvmTrainConfig.model_fields) | {"lambda"}
    harmonic_keys = set(HarmonicConfig.model_fields)
    section: dict[str, Any] = {"svm": {}, "harmonic": {}}
    for key, value in values.items():
        if key in svm_keys:
            section["svm"][key] = value
        elif key in harmonic_keys:
            section["harmonic"][key] = value
        else:
            section[key] = value
    return section


def parse_experiment_config(parser: configparser.ConfigParser, base_dir: Path) -> ExperimentConfig:
    """Build an ExperimentConfig from parsed sections."""
    unknown = [s for s in parser.sections() if s not in SECTIONS]
    if unknown:
        raise ConfigError(f"Unknown config section(s): {', '.join(unknown)}")

    sections = {name: dict(parser[name]) if parser.has_section(name) else {} for name in SECTIONS}

    corpus = sections["corpus"]
    include = corpus.pop(_CORPUS_INCLUDE_KEY, None)
    if include:
        included = _read_parser(base_dir / include, flat=True)
        corpus = {**dict(included["corpus"]), **corpus}

    frontend = sections["frontend"]
    delta = {k: frontend.pop(k) for k in list(frontend) if k in _DELTA_KEYS}

    experiment = sections["experiment"]
    seed = experiment.pop("seed", None) or corpus.get("seed")
    corpus.pop("seed", None)

    data: dict[str, Any] = {
        "corpus": corpus,
        "frontend": frontend,
        "delta": delta,
        "hmm": sections["hmm"],
        "estimator": _svm_section(sections["svm"]),
        "mask": sections["mask"],
        "experiment": experiment,
    }
    if seed is not None:
        data["seed"] = seed
    if "output_dir" in experiment and not Path(experiment["output_dir"]).is_absolute():
        experiment["output_dir"] = str(base_dir / experiment["output_dir"])
    if corpus.get("lexicon_path") and not Path(corpus["lexicon_path"]).is_absolute():
        corpus["lexicon_path"] = str(base_dir / corpus["lexicon_path"])
    return ExperimentConfig.model_validate(data)


def load_experiment_config(path: Path | None = None) -> ExperimentConfig:
    """Read a sectioned experiment file ([corpus], [frontend], [hmm], [svm], [mask], [experiment]).

    Relative paths inside the file resolve against the file's directory.

    Args:
        path: Config file; the bundled desk configuration when None

    Returns:
        Validated experiment configuration

    Raises:
        ConfigError: Missing file, parse error or unknown section
        pydantic.ValidationError: Unknown key or invalid value
    """
    path = path or BUNDLED_CONFIG
    parser = _read_parser(path)
    return parse_experiment_config(parser, path.resolve().parent)
