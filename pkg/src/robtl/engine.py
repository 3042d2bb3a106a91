"""The refrigerated engine case study bundled with the package."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from .dsl import MODELS_DIR, ModelDocument, load_models
from .logic import Formula
from .perturbation import Perturbation

ENGINE_FILE = MODELS_DIR / "engine.robtl"
ATTACKS_FILE = MODELS_DIR / "engine-attacks.robtl"

# left bounds of the offset interval [l_o, 0] used for the temperature attack
OFFSET_PRESETS = (-2.0, -1.5, -1.0)


def build_engine_model(overrides: Optional[Mapping[str, float]] = None,
                       attacks: bool = False) -> ModelDocument:
    """The engine model, optionally with the attack file, with constants overridden."""
    paths = [ENGINE_FILE, ATTACKS_FILE] if attacks else [ENGINE_FILE]
    return load_models(paths, overrides)


@dataclass(frozen=True)
class AttackPresets:
    document: ModelDocument
    perturbations: dict[str, Perturbation]
    formulas: dict[str, Formula]


def attack_presets(overrides: Optional[Mapping[str, float]] = None) -> AttackPresets:
    doc = build_engine_model(overrides, attacks=True)
    return AttackPresets(doc, dict(doc.perturbations), dict(doc.formulas))


def offset_variants(overrides: Optional[Mapping[str, float]] = None) -> dict[float, ModelDocument]:
    """One resolved document per preset offset bound."""
    base = dict(overrides or {})
    return {lo: build_engine_model({**base, "l_o": lo}, attacks=True) for lo in OFFSET_PRESETS}
