"""Synth arena - round simulator, minimap renderer, dataset generation"""
