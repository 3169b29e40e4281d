"""
Application Services
Model runtime shared by the training and inference use cases
"""
