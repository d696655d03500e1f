"""Train harness - AdamW, warmup-cosine schedule, checkpoints, early stopping"""
