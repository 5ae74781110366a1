"""sigtriage: IDPS signature importance classification with a reject option."""

from .sigparse import Signature, parse_rule, serialize
from .rules import RuleSet, IfThenRule, Condition, evaluate
from .features import FeatureSchema, SignatureVectorizer, fit_schema
from .learn import TrainConfig, make_classifier, smote
from .reject import RejectingClassifier, REJECTED
from .evaluation import balanced_accuracy, arc, au_arc, cross_validate

__version__ = "0.1.0"

__all__ = [
    "Signature",
    "parse_rule",
    "serialize",
    "RuleSet",
    "IfThenRule",
    "Condition",
    "evaluate",
    "FeatureSchema",
    "SignatureVectorizer",
    "fit_schema",
    "TrainConfig",
    "make_classifier",
    "smote",
    "RejectingClassifier",
    "REJECTED",
    "balanced_accuracy",
    "arc",
    "au_arc",
    "cross_validate",
    "__version__",
]
