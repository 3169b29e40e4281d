"""
Domain Entities
Sessions, assembled datasets and the value object base
"""
