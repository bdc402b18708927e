"""Hybrid group representations: a permutation-represented factor group
over a polycyclic normal subgroup, with confluent mixed rewriting."""

__version__ = "0.1.0"

from .build import (
    ExtensionData,
    Fixture,
    ValidationReport,
    fixtures,
    from_extension_data,
    from_permutation_group,
    load_group_file,
    save_group_file,
    validate,
)
from .hybrid import (
    CacheConfig,
    HybridElement,
    HybridGroup,
    extension_order,
    format_element,
    group_order,
    parse_element,
)
from .pc import PcAutomorphism, PcElement, PcPresentation, igs_from
from .perm import Permutation, parse_permutation, schreier_sims
from .rws import MonoidPresentation, RewritingSystem, knuth_bendix
from .subgrp import (
    HybridBits,
    Transversal,
    evaluate_hom,
    express,
    factor_group,
    hybrid_bits,
    kernel_short_words,
    sub_contains,
    sub_order,
    transversal,
)
