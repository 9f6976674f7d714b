"""Question-answer generation from simulated scenes."""
from .describe import describe_scene, fmt_number
from .generate import (QAConfig, check_identifiability, generate_for_scene, invertible_paths, make_numeric,
                       make_reverse, make_symbolic, validate_symbolic)
from .pairs import MaskedParam, Number, QAPair, Symbolic, read_jsonl, write_jsonl

__all__ = [
    "describe_scene", "fmt_number", "QAConfig", "check_identifiability", "generate_for_scene", "invertible_paths",
    "make_numeric", "make_reverse", "make_symbolic", "validate_symbolic", "MaskedParam", "Number", "QAPair",
    "Symbolic", "read_jsonl", "write_jsonl",
]
