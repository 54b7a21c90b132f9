"""Decide right and left inertia of endomorphisms of abelian groups."""

from .certificate import A0Description, CaseA, CaseB, EndoScalars, validate_certificate
from .classifier import (
    Verdict,
    automorphism_bridge,
    classify,
    classify_general,
    classify_multiplication,
    classify_periodic,
    classify_torsion_free,
    commutator_check,
    convert_mf_fm,
    lift_finite_index,
    verify_verdict,
)
from .endo import Endomorphism, IllDefined, SlotAction, compose, image_finite, inverse
from .estimator import InertiaClassifier
from .grammar import ParseError, parse_endo, parse_group
from .groups import (
    OMEGA,
    AtLeast,
    CertifiedInfinite,
    Cyclic,
    Element,
    Finite,
    GroupDescriptor,
    Localized,
    PrimeSet,
    Prufer,
    SubgroupHandle,
    section_order,
    section_rank,
)
from .witness import NonInertialWitness, verify_witness

__version__ = "0.1.0"

__all__ = [
    "A0Description",
    "CaseA",
    "CaseB",
    "EndoScalars",
    "validate_certificate",
    "Verdict",
    "automorphism_bridge",
    "classify",
    "classify_general",
    "classify_multiplication",
    "classify_periodic",
    "classify_torsion_free",
    "commutator_check",
    "convert_mf_fm",
    "lift_finite_index",
    "verify_verdict",
    "Endomorphism",
    "IllDefined",
    "SlotAction",
    "compose",
    "image_finite",
    "inverse",
    "InertiaClassifier",
    "ParseError",
    "parse_endo",
    "parse_group",
    "OMEGA",
    "AtLeast",
    "CertifiedInfinite",
    "Cyclic",
    "Element",
    "Finite",
    "GroupDescriptor",
    "Localized",
    "PrimeSet",
    "Prufer",
    "SubgroupHandle",
    "section_order",
    "section_rank",
    "NonInertialWitness",
    "verify_witness",
]
