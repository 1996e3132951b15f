"""Confluence analysis for ACT-R models through their translation to CHR."""

from .actr import ActrModel, ActrRule, ActrState, ModelError, actr_step, to_set_normal_form
from .chr import ChrRule, ChrState, entails, match_rule, normalize, states_equivalent
from .confluence import CheckOptions, ConfluenceReport, check_confluence, compute_overlaps
from .invariants import check_A, reconstruct_actr, satisfiable_A
from .parser import format_model, load_model, parse_model
from .translation import merge_stores, translate_rule, translate_state

__all__ = [
    "ActrModel", "ActrRule", "ActrState", "ModelError", "actr_step", "to_set_normal_form",
    "ChrRule", "ChrState", "entails", "match_rule", "normalize", "states_equivalent",
    "CheckOptions", "ConfluenceReport", "check_confluence", "compute_overlaps",
    "check_A", "reconstruct_actr", "satisfiable_A",
    "format_model", "load_model", "parse_model",
    "merge_stores", "translate_rule", "translate_state",
]
