"""
Root-Cause Classifier Configuration Settings

Loads defaults from environment variables and the project's .env file, and
assembles the effective run configuration (defaults < environment < config
file < command-line flags).
"""

import io
import json
import os
import re
from dataclasses import dataclass, fields, asdict
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from dotenv import load_dotenv, dotenv_values

# Base paths
BASE_DIR = Path(__file__).parent.parent
PROJECT_ROOT = BASE_DIR.parent
DATA_DIR = BASE_DIR / "data"

# Load environment variables from the project's .env file
env_file = PROJECT_ROOT / ".env"
if env_file.exists():
    load_dotenv(env_file)


class ConfigError(Exception):
    """Raised when configuration values are missing, unknown or invalid"""
    pass


def get_env(key: str, default=None, cast_type=str):
    """Get environment variable with type casting and default values"""
    value = os.getenv(key, default)
    if value is None:
        return None
    return _cast(key, value, cast_type)


def _cast(key: str, value: Any, cast_type):
    if cast_type == bool:
        # If value is already a bool (from default), return it directly
        if isinstance(value, bool):
            return value
        return str(value).strip().lower() in ('true', '1', 'yes', 'on')
    try:
        if cast_type == int:
            return int(value)
        elif cast_type == float:
            return float(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{key}: cannot read {value!r} as {cast_type.__name__}") from e
    return str(value)


# ============================================================================
# General
# ============================================================================
SEED = get_env('SEED', 0, int)
JOBS = get_env('JOBS', 1, int)

# Per-component seed offsets; every random stream derives from the root seed
SEED_OFFSETS = {
    "stratify": 0,
    "smote": 10_000,
    "train": 20_000,
    "grid": 30_000,
    "topics": 40_000,
    "lda": 50_000,
}

# ============================================================================
# Text Preparation
# ============================================================================
STOPWORDS_FILE = get_env('PREP_STOPWORDS_FILE', str(DATA_DIR / "stopwords_en.txt"))
KEYWORDS_FILE = get_env('PREP_KEYWORDS_FILE', str(DATA_DIR / "java_xml_keywords.txt"))
LEXICON_FILE = get_env('PREP_LEXICON_FILE', str(DATA_DIR / "word_classes.txt"))
PREP_MIN_TOKEN_LEN = get_env('PREP_MIN_TOKEN_LEN', 2, int)
PREP_INCLUDE_TITLE = get_env('PREP_INCLUDE_TITLE', False, bool)
PREP_SPELL_CORRECTION = get_env('PREP_SPELL_CORRECTION', False, bool)
PREP_POS_FILTER = get_env('PREP_POS_FILTER', True, bool)

# ============================================================================
# Vectorize (TF-IDF)
# ============================================================================
VECTORIZE_MIN_DF = get_env('VECTORIZE_MIN_DF', 2, int)
VECTORIZE_MAX_DF_RATIO = get_env('VECTORIZE_MAX_DF_RATIO', 0.95, float)
VECTORIZE_L2_NORMALIZE = get_env('VECTORIZE_L2_NORMALIZE', False, bool)

# ============================================================================
# Balance (SMOTE)
# ============================================================================
BALANCE_ENABLED = get_env('BALANCE_ENABLED', True, bool)
BALANCE_K = get_env('BALANCE_K', 5, int)
BALANCE_METRIC = get_env('BALANCE_METRIC', 'euclidean')

# ============================================================================
# Model (multinomial logistic regression)
# ============================================================================
MODEL_L2_STRENGTH = get_env('MODEL_L2_STRENGTH', 0.01, float)
MODEL_LEARNING_RATE = get_env('MODEL_LEARNING_RATE', 1.0, float)
MODEL_MAX_EPOCHS = get_env('MODEL_MAX_EPOCHS', 500, int)
MODEL_CONVERGENCE_TOL = get_env('MODEL_CONVERGENCE_TOL', 1e-6, float)
MODEL_GRID_SEARCH = get_env('MODEL_GRID_SEARCH', False, bool)
MODEL_GRID_FOLDS = get_env('MODEL_GRID_FOLDS', 3, int)

# Grid values are comma-separated lists
MODEL_GRID_L2_STRENGTH = get_env('MODEL_GRID_L2_STRENGTH', '0.0001,0.001,0.01,0.1,1')
MODEL_GRID_LEARNING_RATE = get_env('MODEL_GRID_LEARNING_RATE', '0.1,1')

# ============================================================================
# Evaluate (repeated stratified k-fold)
# ============================================================================
EVALUATE_FOLDS = get_env('EVALUATE_FOLDS', 10, int)
EVALUATE_RUNS = get_env('EVALUATE_RUNS', 100, int)

# ============================================================================
# Topics (LDA-GA)
# ============================================================================
TOPICS_POPULATION = get_env('TOPICS_POPULATION', 6, int)
TOPICS_GENERATIONS = get_env('TOPICS_GENERATIONS', 5, int)
TOPICS_K_MIN = get_env('TOPICS_K_MIN', 2, int)
TOPICS_K_MAX = get_env('TOPICS_K_MAX', 8, int)
TOPICS_MUTATION_RATE = get_env('TOPICS_MUTATION_RATE', 0.3, float)
TOPICS_ELITISM = get_env('TOPICS_ELITISM', 1, int)
TOPICS_LDA_ITERATIONS = get_env('TOPICS_LDA_ITERATIONS', 500, int)
TOPICS_BURN_IN = get_env('TOPICS_BURN_IN', 100, int)
TOPICS_BETA = get_env('TOPICS_BETA', 0.01, float)
TOPICS_MAX_TOPICS = get_env('TOPICS_MAX_TOPICS', 5, int)
TOPICS_TOP_TERMS = get_env('TOPICS_TOP_TERMS', 1, int)
TOPICS_MIN_REPORTS = 4

# ============================================================================
# Timefix
# ============================================================================
TIMEFIX_METRIC = get_env('TIMEFIX_METRIC', 'all')

# ============================================================================
# Issue Tracker Client
# ============================================================================
TRACKER_PAGE_SIZE = get_env('TRACKER_PAGE_SIZE', 50, int)
TRACKER_TIMEOUT = get_env('TRACKER_TIMEOUT', 30.0, float)
TRACKER_MAX_RETRIES = get_env('TRACKER_MAX_RETRIES', 5, int)
TRACKER_BACKOFF_BASE = get_env('TRACKER_BACKOFF_BASE', 1.0, float)
TRACKER_BACKOFF_CAP = get_env('TRACKER_BACKOFF_CAP', 60.0, float)
TRACKER_TOKEN = get_env('TRACKER_TOKEN', '')
TRACKER_MAPPING_FILE = get_env('TRACKER_MAPPING_FILE', '')

# ============================================================================
# Logging Configuration
# ============================================================================

# Log levels: DEBUG, INFO, WARNING, ERROR, CRITICAL
LOG_LEVEL = get_env('LOG_LEVEL', 'INFO')
LOG_FILE = get_env('LOG_FILE', '')

# Log rotation
LOG_MAX_BYTES = 10 * 1024 * 1024  # 10MB
LOG_BACKUP_COUNT = 5

# Log format
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


# ============================================================================
# Effective run configuration
# ============================================================================

# Config files may group keys under [section] lines
SECTION_HEADER = re.compile(r"^\s*\[[^\]]*\]\s*$")


@dataclass
class RunConfig:
    """
    Flat, section-prefixed view of every tunable.

    Field names double as config-file keys (upper-cased) and as CLI flags
    (``model_l2_strength`` -> ``MODEL_L2_STRENGTH`` / ``--model-l2-strength``).
    """
    seed: int = SEED
    jobs: int = JOBS

    prep_min_token_len: int = PREP_MIN_TOKEN_LEN
    prep_include_title: bool = PREP_INCLUDE_TITLE
    prep_spell_correction: bool = PREP_SPELL_CORRECTION
    prep_pos_filter: bool = PREP_POS_FILTER
    prep_stopwords_file: str = STOPWORDS_FILE
    prep_keywords_file: str = KEYWORDS_FILE
    prep_lexicon_file: str = LEXICON_FILE

    vectorize_min_df: int = VECTORIZE_MIN_DF
    vectorize_max_df_ratio: float = VECTORIZE_MAX_DF_RATIO
    vectorize_l2_normalize: bool = VECTORIZE_L2_NORMALIZE

    balance_enabled: bool = BALANCE_ENABLED
    balance_k: int = BALANCE_K
    balance_metric: str = BALANCE_METRIC

    model_l2_strength: float = MODEL_L2_STRENGTH
    model_learning_rate: float = MODEL_LEARNING_RATE
    model_max_epochs: int = MODEL_MAX_EPOCHS
    model_convergence_tol: float = MODEL_CONVERGENCE_TOL
    model_grid_search: bool = MODEL_GRID_SEARCH
    model_grid_folds: int = MODEL_GRID_FOLDS
    model_grid_l2_strength: str = MODEL_GRID_L2_STRENGTH
    model_grid_learning_rate: str = MODEL_GRID_LEARNING_RATE

    evaluate_folds: int = EVALUATE_FOLDS
    evaluate_runs: int = EVALUATE_RUNS

    topics_population: int = TOPICS_POPULATION
    topics_generations: int = TOPICS_GENERATIONS
    topics_k_min: int = TOPICS_K_MIN
    topics_k_max: int = TOPICS_K_MAX
    topics_mutation_rate: float = TOPICS_MUTATION_RATE
    topics_elitism: int = TOPICS_ELITISM
    topics_lda_iterations: int = TOPICS_LDA_ITERATIONS
    topics_burn_in: int = TOPICS_BURN_IN
    topics_beta: float = TOPICS_BETA
    topics_max_topics: int = TOPICS_MAX_TOPICS
    topics_top_terms: int = TOPICS_TOP_TERMS

    timefix_metric: str = TIMEFIX_METRIC

    tracker_page_size: int = TRACKER_PAGE_SIZE
    tracker_timeout: float = TRACKER_TIMEOUT
    tracker_max_retries: int = TRACKER_MAX_RETRIES
    tracker_backoff_base: float = TRACKER_BACKOFF_BASE
    tracker_backoff_cap: float = TRACKER_BACKOFF_CAP
    tracker_token: str = TRACKER_TOKEN
    tracker_mapping_file: str = TRACKER_MAPPING_FILE

    @classmethod
    def field_types(cls) -> Dict[str, type]:
        """Map of field name -> python type used for casting"""
        casts = {"int": int, "float": float, "bool": bool, "str": str}
        return {f.name: casts[f.type if isinstance(f.type, str) else f.type.__name__]
                for f in fields(cls)}

    @classmethod
    def load(
        cls,
        config_file: Optional[str] = None,
        overrides: Optional[Mapping[str, Any]] = None
    ) -> "RunConfig":
        """
        Build the effective configuration.

        Args:
            config_file: Optional key-value file (dotenv syntax, [section] lines ignored)
            overrides: Field values from CLI flags; None values are ignored

        Raises:
            ConfigError: On unknown keys, uncastable values or failed validation
        """
        config = cls()
        types = cls.field_types()

        if config_file:
            path = Path(config_file)
            if not path.is_file():
                raise ConfigError(f"Config file not found: {path}")
            # [section] lines only group keys; the key names stay flat
            lines = path.read_text(encoding="utf-8").splitlines()
            text = "\n".join(line for line in lines if not SECTION_HEADER.match(line))
            for key, value in dotenv_values(stream=io.StringIO(text)).items():
                name = key.strip().lower()
                if name not in types:
                    raise ConfigError(f"Unknown config key in {path}: {key}")
                if value is None:
                    continue
                setattr(config, name, _cast(key, value, types[name]))

        for name, value in (overrides or {}).items():
            if value is None:
                continue
            if name not in types:
                raise ConfigError(f"Unknown config key: {name}")
            setattr(config, name, _cast(name, value, types[name]))

        config.validate()
        return config

    def validate(self) -> None:
        """Raise ConfigError listing every invalid value"""
        errors = validate_config(self)
        if errors:
            raise ConfigError("; ".join(errors))

    def grid(self) -> Dict[str, List[float]]:
        """Grid-search values as parsed lists"""
        return {
            "l2_strength": _parse_float_list("model_grid_l2_strength", self.model_grid_l2_strength),
            "learning_rate": _parse_float_list("model_grid_learning_rate", self.model_grid_learning_rate),
        }

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        if data.get("tracker_token"):
            data["tracker_token"] = "***"
        return data

    def dump(self) -> str:
        """Effective configuration as sorted, machine-readable JSON"""
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _parse_float_list(key: str, text: str) -> List[float]:
    try:
        values = [float(part) for part in str(text).split(",") if part.strip()]
    except ValueError as e:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {text!r}") from e
    if not values:
        raise ConfigError(f"{key}: grid must not be empty")
    return values


def derive_seed(root: int, component: str, index: int = 0) -> int:
    """Seed for one component: root + fixed component offset + index"""
    return int(root) + SEED_OFFSETS[component] + int(index)


# ============================================================================
# Validation
# ============================================================================

def validate_config(config: RunConfig) -> List[str]:
    """Validate configuration settings"""
    errors = []

    if config.jobs < 1:
        errors.append("JOBS must be >= 1")

    if config.prep_min_token_len < 1:
        errors.append("PREP_MIN_TOKEN_LEN must be >= 1")
    for key in ("prep_stopwords_file", "prep_keywords_file", "prep_lexicon_file"):
        path = getattr(config, key)
        if path and not Path(path).is_file():
            errors.append(f"{key.upper()} not found: {path}")

    if config.vectorize_min_df < 1:
        errors.append("VECTORIZE_MIN_DF must be >= 1")
    if not 0.0 < config.vectorize_max_df_ratio <= 1.0:
        errors.append("VECTORIZE_MAX_DF_RATIO must be in (0, 1]")

    if config.balance_k < 1:
        errors.append("BALANCE_K must be >= 1")
    if config.balance_metric not in ("euclidean", "cosine"):
        errors.append("BALANCE_METRIC must be 'euclidean' or 'cosine'")

    if config.model_l2_strength < 0:
        errors.append("MODEL_L2_STRENGTH must be >= 0")
    if config.model_learning_rate <= 0:
        errors.append("MODEL_LEARNING_RATE must be > 0")
    if config.model_max_epochs < 1:
        errors.append("MODEL_MAX_EPOCHS must be >= 1")
    if config.model_convergence_tol <= 0:
        errors.append("MODEL_CONVERGENCE_TOL must be > 0")
    if config.model_grid_folds < 2:
        errors.append("MODEL_GRID_FOLDS must be >= 2")

    if config.evaluate_folds < 2:
        errors.append("EVALUATE_FOLDS must be >= 2")
    if config.evaluate_runs < 1:
        errors.append("EVALUATE_RUNS must be >= 1")

    if config.topics_k_min < 2:
        errors.append("TOPICS_K_MIN must be >= 2")
    if config.topics_k_max <= config.topics_k_min:
        errors.append("TOPICS_K_MAX must be > TOPICS_K_MIN")
    if config.topics_population < 2:
        errors.append("TOPICS_POPULATION must be >= 2")
    if not 1 <= config.topics_elitism <= config.topics_population:
        errors.append("TOPICS_ELITISM must be between 1 and TOPICS_POPULATION")
    if config.topics_burn_in >= config.topics_lda_iterations:
        errors.append("TOPICS_BURN_IN must be < TOPICS_LDA_ITERATIONS")

    if config.timefix_metric.lower() not in ("all", "dbr", "dba", "dbc", "dbf", "dac"):
        errors.append("TIMEFIX_METRIC must be one of all, dbr, dba, dbc, dbf, dac")

    if config.tracker_page_size < 1:
        errors.append("TRACKER_PAGE_SIZE must be >= 1")
    if config.tracker_max_retries < 0:
        errors.append("TRACKER_MAX_RETRIES must be >= 0")

    return errors


__all__ = [
    "BASE_DIR",
    "PROJECT_ROOT",
    "DATA_DIR",
    "ConfigError",
    "RunConfig",
    "derive_seed",
    "get_env",
    "validate_config",
    "SEED_OFFSETS",
    "TOPICS_MIN_REPORTS",
    "LOG_LEVEL",
    "LOG_FILE",
    "LOG_FORMAT",
    "LOG_DATE_FORMAT",
    "LOG_MAX_BYTES",
    "LOG_BACKUP_COUNT",
]
