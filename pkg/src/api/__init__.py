"""
API Layer
Command line interface
"""
