"""
Configuration management for the Kisin module toolkit
Centralizes all tunable settings: field defaults, precision policy,
engine budgets, logging, caching and output locations
"""

import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Base directory
BASE_DIR = Path(__file__).resolve().parent.parent


def _flag(name, default):
    return os.getenv(name, default).lower() == 'true'


# Coefficient field defaults
FIELD_CONFIG = {
    'default_p': int(os.getenv('KISIN_DEFAULT_P', 5)),
    'default_f': int(os.getenv('KISIN_DEFAULT_F', 1)),
    'witt_precision': int(os.getenv('KISIN_WITT_PRECISION', 2))
}

# Truncation policy for the model of R (x) k_E
PRECISION_CONFIG = {
    'precision_factor': int(os.getenv('KISIN_PRECISION_FACTOR', 4)),
    'min_precision': int(os.getenv('KISIN_MIN_PRECISION', 0)),
    'epsilon_model': os.getenv('KISIN_EPSILON_MODEL', 'standard')
}

# Linear-kernel engine budget
KERNEL_CONFIG = {
    'max_dimension': int(os.getenv('KISIN_KERNEL_MAX_DIMENSION', 3)),
    'max_unknowns': int(os.getenv('KISIN_KERNEL_MAX_UNKNOWNS', 4000))
}

# Shape validation
SHAPE_CONFIG = {
    # None means p + 1 ("the extra terms are always of degree p or p+1")
    'extra_degree_bound': (int(os.getenv('KISIN_EXTRA_DEGREE_BOUND'))
                           if os.getenv('KISIN_EXTRA_DEGREE_BOUND') else None),
    'max_extra_terms': int(os.getenv('KISIN_MAX_EXTRA_TERMS', 2))
}

# Character model and certificate format
LIFT_CONFIG = {
    'psi_twist': int(os.getenv('KISIN_PSI_TWIST', 1)),
    'schema_version': 1
}

# Fuzzing driver bounds
FUZZ_CONFIG = {
    'max_count': int(os.getenv('KISIN_FUZZ_MAX_COUNT', 100000)),
    'max_dimension': int(os.getenv('KISIN_FUZZ_MAX_DIMENSION', 5)),
    'kernel_every': int(os.getenv('KISIN_FUZZ_KERNEL_EVERY', 25))
}

# Command-line guards
CLI_CONFIG = {
    'weyl_max_dimension': int(os.getenv('KISIN_WEYL_MAX_DIMENSION', 4)),
    'enumerate_max_dimension': 5
}

# Logging configuration
LOGGING_CONFIG = {
    'level': os.getenv('LOG_LEVEL', 'WARNING'),
    'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    'to_file': _flag('LOG_TO_FILE', 'False'),
    'file': BASE_DIR / 'logs' / 'kisin_toolkit.log',
    'max_bytes': int(os.getenv('LOG_MAX_BYTES', 10485760)),  # 10MB
    'backup_count': int(os.getenv('LOG_BACKUP_COUNT', 5))
}

# Cache configuration
CACHE_CONFIG = {
    'enabled': _flag('CACHE_ENABLED', 'True'),
    'max_size': int(os.getenv('CACHE_MAX_SIZE', 256))
}

# Export configuration
EXPORT_CONFIG = {
    'output_dir': Path(os.getenv('KISIN_OUTPUT_DIR', BASE_DIR / 'reports')),
    'corpus_dir': Path(os.getenv('KISIN_CORPUS_DIR', BASE_DIR / 'corpus')),
    'schema_dir': BASE_DIR / 'schemas',
    'fixture_dir': BASE_DIR / 'fixtures'
}


def create_directories():
    """Create output directories if they don't exist"""
    directories = [
        BASE_DIR / 'logs',
        EXPORT_CONFIG['output_dir'],
        EXPORT_CONFIG['corpus_dir']
    ]

    for directory in directories:
        directory.mkdir(parents=True, exist_ok=True)


def configure_logging(level=None):
    """
    Install the toolkit's log handlers on the root logger

    stdout carries machine-readable JSON, so log records go to stderr
    (and optionally to a rotating file).

    Args:
        level (str, optional): Overrides LOGGING_CONFIG['level']
    """
    root = logging.getLogger()
    root.setLevel(level or LOGGING_CONFIG['level'])
    for handler in list(root.handlers):
        root.removeHandler(handler)

    formatter = logging.Formatter(LOGGING_CONFIG['format'])
    stream = logging.StreamHandler(sys.stderr)
    stream.setFormatter(formatter)
    root.addHandler(stream)

    if LOGGING_CONFIG['to_file']:
        LOGGING_CONFIG['file'].parent.mkdir(parents=True, exist_ok=True)
        file_handler = RotatingFileHandler(
            LOGGING_CONFIG['file'],
            maxBytes=LOGGING_CONFIG['max_bytes'],
            backupCount=LOGGING_CONFIG['backup_count']
        )
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)


def get_config(section=None):
    """
    Get configuration for a specific section or all configurations

    Args:
        section (str, optional): Configuration section name

    Returns:
        dict: Configuration dictionary
    """
    configs = {
        'field': FIELD_CONFIG,
        'precision': PRECISION_CONFIG,
        'kernel': KERNEL_CONFIG,
        'shape': SHAPE_CONFIG,
        'lift': LIFT_CONFIG,
        'fuzz': FUZZ_CONFIG,
        'cli': CLI_CONFIG,
        'logging': LOGGING_CONFIG,
        'cache': CACHE_CONFIG,
        'export': EXPORT_CONFIG
    }

    if section:
        return configs.get(section, {})
    return configs


def print_config(stream=None):
    """Print current configuration (for debugging)"""
    stream = stream or sys.stderr
    print("=" * 60, file=stream)
    print("Current Configuration", file=stream)
    print("=" * 60, file=stream)

    configs = get_config()
    for section, config in configs.items():
        print(f"\n{section.upper()}:", file=stream)
        for key, value in config.items():
            print(f"  {key}: {value}", file=stream)

    print("\n" + "=" * 60, file=stream)


if __name__ == '__main__':
    print_config()
