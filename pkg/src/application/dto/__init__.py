"""
Application DTOs
Data Transfer Objects for requests and reports
"""
from .requests import *
from .reports import *
