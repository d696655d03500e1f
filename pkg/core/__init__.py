"""Core components for the minimap oracle pipeline"""
