"""The .robtl modelling and query language."""
from __future__ import annotations

from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

from .printer import arith_text, expr_text, formula_text, pert_text, print_document
from .resolver import ModelDocument, parse_model, parse_models, parse_query

MODELS_DIR = Path(__file__).resolve().parent.parent / "models"


def load_models(paths: Sequence[Union[str, Path]], overrides: Optional[Mapping[str, float]] = None) -> ModelDocument:
    """Read and resolve model files that share one namespace."""
    sources = [(Path(p).read_text(encoding="utf-8"), str(p)) for p in paths]
    return parse_models(sources, overrides)


__all__ = ["MODELS_DIR", "ModelDocument", "arith_text", "expr_text", "formula_text", "load_models",
           "parse_model", "parse_models", "parse_query", "pert_text", "print_document"]
