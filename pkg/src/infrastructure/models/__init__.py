"""
Model Infrastructure
Torch modules and batch collation
"""
