"""Shared utilities for modules"""
from .scoring import per_second_counts, predicted_class, predicted_classes

__all__ = ["per_second_counts", "predicted_class", "predicted_classes"]
