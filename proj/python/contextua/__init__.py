from ._core import (
    ContextPoset,
    ContextuaError,
    __version__,
    bell_analysis,
    chsh_value,
    classify,
    mutually_unbiased_bases,
    run_cli,
    symmetry_check,
)

__all__ = [
    "ContextPoset",
    "ContextuaError",
    "__version__",
    "bell_analysis",
    "chsh_value",
    "classify",
    "mutually_unbiased_bases",
    "run_cli",
    "symmetry_check",
]
