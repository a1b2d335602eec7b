"""Computational toolkit for anticyclotomic p-adic BSD-type formulas."""

from .padic import PadicNumber, padic, unit_root
from .iwasawa import (
    GradedValue,
    GroupRingElement,
    IwasawaSeries,
    derivative_operator,
    leading_image,
    norm_element,
    ord_J,
    project_mu,
    project_pi,
)

__version__ = "0.1.0"

__all__ = [
    "GradedValue", "GroupRingElement", "IwasawaSeries", "PadicNumber", "derivative_operator",
    "leading_image", "norm_element", "ord_J", "padic", "project_mu", "project_pi", "unit_root",
]
