"""List-decodable Byzantine-robust private information retrieval over prime fields."""

from .field import FieldElement, FieldModulus
from .poly import HermiteSample, Poly

__all__ = [
    "FieldElement",
    "FieldModulus",
    "HermiteSample",
    "Poly",
]
