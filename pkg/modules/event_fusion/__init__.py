"""Event fusion - tactical event embeddings fused into visual tokens"""
