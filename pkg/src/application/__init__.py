"""
Application Layer
Contains use cases, DTOs and the shared model runtime
"""