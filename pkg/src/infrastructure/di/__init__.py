"""
Dependency Injection Infrastructure
Container and dependency management
"""
from .container import ServiceContainer, build_container

__all__ = [
    'ServiceContainer',
    'build_container'
]
