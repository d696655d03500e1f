"""Minimap vision - timer OCR, icon detection, event inference, round segmentation"""
