"""Spacetime model - divided space-time attention round classifier"""
