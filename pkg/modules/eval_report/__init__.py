"""Eval report - per-second accuracy, bucket tables, charts"""
