"""
Checkpoint Storage
"""
